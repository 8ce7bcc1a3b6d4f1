// xlalign/xlalign.hpp
//
// Umbrella header.

#pragma once

#include "xlalign/align.hpp"
#include "xlalign/dictionary.hpp"
#include "xlalign/embio.hpp"
#include "xlalign/error.hpp"
#include "xlalign/eval.hpp"
#include "xlalign/mapping.hpp"
#include "xlalign/pipeline.hpp"
#include "xlalign/translation.hpp"
#include "xlalign/version.hpp"

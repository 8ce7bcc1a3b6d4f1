// xlalign/log.hpp

// Copyright 2026 The xlalign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>

// Line-oriented logging to stderr. Each record looks like
//   xlalign level=info stage=align msg="fitted orthogonal map"
// so that log scrapers can split on spaces and `=`.
namespace xlalign::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

inline std::atomic<Level> &threshold() {
  static std::atomic<Level> level{Level::info};
  return level;
}

inline void set_level(Level level) { threshold().store(level); }

inline const char *level_name(Level level) {
  switch (level) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
    case Level::off: return "off";
  }
  return "info";
}

inline std::string quote(std::string_view msg) {
  std::string out = "\"";
  for (char c : msg) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  out += '"';
  return out;
}

inline void write(Level level, std::string_view stage, std::string_view msg) {
  if (level < threshold().load()) return;
  static std::mutex mu;
  std::ostringstream line;
  line << "xlalign level=" << level_name(level) << " stage=" << stage
       << " msg=" << quote(msg) << '\n';
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << line.str();
}

inline void debug(std::string_view stage, std::string_view msg) {
  write(Level::debug, stage, msg);
}
inline void info(std::string_view stage, std::string_view msg) {
  write(Level::info, stage, msg);
}
inline void warn(std::string_view stage, std::string_view msg) {
  write(Level::warn, stage, msg);
}
inline void error(std::string_view stage, std::string_view msg) {
  write(Level::error, stage, msg);
}

}  // namespace xlalign::log

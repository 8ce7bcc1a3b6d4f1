// xlalign/mapping.hpp

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

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "xlalign/dictionary.hpp"
#include "xlalign/embio.hpp"
#include "xlalign/error.hpp"
#include "xlalign/text.hpp"

namespace xlalign {

enum class MapKind { orthogonal, unconstrained, whitening, composite };

inline const char *to_string(MapKind kind) {
  switch (kind) {
    case MapKind::orthogonal: return "orthogonal";
    case MapKind::unconstrained: return "unconstrained";
    case MapKind::whitening: return "whitening";
    case MapKind::composite: return "composite";
  }
  return "composite";
}

inline MapKind parse_map_kind(std::string_view s) {
  if (s == "orthogonal") return MapKind::orthogonal;
  if (s == "unconstrained") return MapKind::unconstrained;
  if (s == "whitening") return MapKind::whitening;
  if (s == "composite") return MapKind::composite;
  throw DataError("unknown map kind '" + std::string(s) + "'");
}

/// A right-multiplied linear map: a row vector x becomes x * matrix.
struct LinearMap {
  Matrix matrix;
  MapKind kind = MapKind::unconstrained;
  NormRecipe assumes_norm;
  std::string label;

  Eigen::Index d_in() const { return matrix.rows(); }
  Eigen::Index d_out() const { return matrix.cols(); }

  Matrix apply(const Matrix &rows) const {
    if (rows.cols() != d_in())
      throw DataError("map '" + label + "' expects dimension " +
                      std::to_string(d_in()) + ", got " + std::to_string(rows.cols()));
    return rows * matrix;
  }

  // Throws DataError when the kind's structural invariant does not hold.
  void validate() const {
    if (!matrix.allFinite()) throw DataError("map '" + label + "' is not finite");
    if (kind == MapKind::orthogonal) {
      if (d_in() != d_out()) throw DataError("orthogonal map must be square");
      Matrix gram = matrix.transpose() * matrix;
      double err = (gram - Matrix::Identity(d_in(), d_in())).cwiseAbs().maxCoeff();
      if (err > 1e-6)
        throw DataError("map '" + label + "' is not orthogonal (error " +
                        std::to_string(err) + ")");
    }
    if (kind == MapKind::whitening) {
      if (d_in() != d_out()) throw DataError("whitening map must be square");
      if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-6)
        throw DataError("map '" + label + "' is not symmetric");
    }
  }
};

// Product of a chain of maps, applied left to right.
inline LinearMap compose(const std::vector<LinearMap> &maps, std::string label = "composite") {
  if (maps.empty()) throw DataError("cannot compose an empty map chain");
  Matrix m = maps.front().matrix;
  for (std::size_t i = 1; i < maps.size(); ++i) {
    if (maps[i].d_in() != m.cols())
      throw DataError("map chain dimension mismatch at '" + maps[i].label + "'");
    m = m * maps[i].matrix;
  }
  return {std::move(m), MapKind::composite, maps.front().assumes_norm, std::move(label)};
}

/// Map files hold one block per map: a header line
///   <kind> <d_in> <d_out> [norm=<recipe>] [label=<name>]
/// followed by d_in rows of d_out space-separated values.
inline void save_maps(const std::vector<LinearMap> &maps,
                      const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write map file " + path.string());
  std::string buf;
  for (const auto &map : maps) {
    buf += to_string(map.kind);
    buf += ' ' + std::to_string(map.d_in()) + ' ' + std::to_string(map.d_out());
    if (!map.assumes_norm.empty()) buf += " norm=" + format_recipe(map.assumes_norm);
    if (!map.label.empty()) buf += " label=" + map.label;
    buf += '\n';
    for (Eigen::Index r = 0; r < map.d_in(); ++r) {
      for (Eigen::Index c = 0; c < map.d_out(); ++c) {
        if (c) buf += ' ';
        text::append_double(buf, map.matrix(r, c));
      }
      buf += '\n';
    }
  }
  out << buf;
  if (!out) throw DataError("failed writing " + path.string());
}

inline std::vector<LinearMap> load_maps(const std::filesystem::path &path) {
  const std::string file = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open map file " + file);
  std::vector<LinearMap> maps;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto head = text::split(text::trim(line), ' ');
    if (head.size() < 3)
      throw ParseError(ParseErrorCode::malformed_header, file, line_no,
                       "expected '<kind> <d_in> <d_out>'");
    LinearMap map;
    map.kind = parse_map_kind(head[0]);
    auto rows = text::parse_int<long>(head[1]);
    auto cols = text::parse_int<long>(head[2]);
    if (!rows || !cols || *rows <= 0 || *cols <= 0)
      throw ParseError(ParseErrorCode::malformed_header, file, line_no,
                       "bad map dimensions");
    for (std::size_t k = 3; k < head.size(); ++k) {
      if (head[k].substr(0, 5) == "norm=") {
        map.assumes_norm = parse_recipe(head[k].substr(5));
      } else if (head[k].substr(0, 6) == "label=") {
        map.label = std::string(head[k].substr(6));
      } else {
        throw ParseError(ParseErrorCode::malformed_header, file, line_no,
                         "unknown header field '" + std::string(head[k]) + "'");
      }
    }
    map.matrix.resize(*rows, *cols);
    for (long r = 0; r < *rows; ++r) {
      if (!std::getline(in, line))
        throw ParseError(ParseErrorCode::truncated, file, line_no + 1, "missing map rows");
      ++line_no;
      auto fields = text::split(text::trim(line), ' ');
      if (static_cast<long>(fields.size()) != *cols)
        throw ParseError(ParseErrorCode::wrong_arity, file, line_no,
                         "expected " + std::to_string(*cols) + " values");
      for (long c = 0; c < *cols; ++c) {
        auto v = text::parse_double(fields[c]);
        if (!v || !std::isfinite(*v))
          throw ParseError(ParseErrorCode::non_finite, file, line_no,
                           "bad value '" + std::string(fields[c]) + "'");
        map.matrix(r, c) = *v;
      }
    }
    maps.push_back(std::move(map));
  }
  return maps;
}

/// Dictionary supervision: row i of X and Z are the source and target vectors
/// of used_pairs[i].
struct PairedMatrices {
  Matrix X;
  Matrix Z;
  std::vector<WordPair> used_pairs;
  std::size_t oov_src = 0;
  std::size_t oov_tgt = 0;
};

inline PairedMatrices build_paired_matrices(const VocabEmbedding &src,
                                            const VocabEmbedding &tgt,
                                            const DictionaryPairs &dict) {
  auto mismatch = [](const std::string &a, const std::string &b) {
    return !a.empty() && !b.empty() && a != b;
  };
  if (mismatch(dict.src_lang, src.language()) || mismatch(dict.tgt_lang, tgt.language()))
    throw DataError("dictionary " + dict.src_lang + "-" + dict.tgt_lang +
                    " does not match embeddings " + src.language() + "/" +
                    tgt.language());
  PairedMatrices pm;
  std::vector<std::pair<std::size_t, std::size_t>> rows;
  rows.reserve(dict.size());
  for (const auto &p : dict.pairs) {
    auto s = src.index_of(p.src);
    auto t = tgt.index_of(p.tgt);
    if (!s) ++pm.oov_src;
    if (!t) ++pm.oov_tgt;
    if (s && t) {
      rows.emplace_back(*s, *t);
      pm.used_pairs.push_back(p);
    }
  }
  if (rows.empty())
    throw DataError("no dictionary pair has both words in vocabulary (" +
                    std::to_string(pm.oov_src) + " source OOV, " +
                    std::to_string(pm.oov_tgt) + " target OOV)");
  const auto n = static_cast<Eigen::Index>(rows.size());
  pm.X.resize(n, src.dim());
  pm.Z.resize(n, tgt.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    pm.X.row(i) = src.row(rows[i].first);
    pm.Z.row(i) = tgt.row(rows[i].second);
  }
  return pm;
}

/// Thin SVD M = U * diag(s) * V^T with s descending.
struct Svd {
  Matrix U;
  Vector s;
  Matrix V;
};

/// SVD with a fixed sign convention: in every left singular vector the entry
/// of largest magnitude (lowest index on ties) is non-negative, and the
/// matching right singular vector is flipped along with it.
inline Svd signed_svd(const Matrix &m) {
  if (!m.allFinite()) throw DataError("SVD input contains non-finite values");
  Eigen::MatrixXd cm = m;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cm, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Svd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  for (Eigen::Index j = 0; j < out.U.cols(); ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < out.U.rows(); ++i)
      if (std::abs(out.U(i, j)) > std::abs(out.U(best, j))) best = i;
    if (out.U(best, j) < 0) {
      out.U.col(j) *= -1.0;
      out.V.col(j) *= -1.0;
    }
  }
  return out;
}

inline Svd cross_covariance_svd(const Matrix &X, const Matrix &Z) {
  if (X.rows() != Z.rows() || X.rows() == 0)
    throw DataError("paired matrices need equal, non-zero row counts");
  return signed_svd(X.transpose() * Z);
}

inline Svd cross_covariance_svd(const PairedMatrices &pm) {
  return cross_covariance_svd(pm.X, pm.Z);
}

/// Orthogonal W minimizing ||XW - Z||_F, i.e. U V^T from the SVD of X^T Z.
inline LinearMap procrustes(const PairedMatrices &pm) {
  if (pm.X.cols() != pm.Z.cols())
    throw DataError("orthogonal mapping needs equal dimensions, got " +
                    std::to_string(pm.X.cols()) + " and " + std::to_string(pm.Z.cols()));
  Svd svd = cross_covariance_svd(pm);
  return {svd.U * svd.V.transpose(), MapKind::orthogonal, {}, "procrustes"};
}

struct LeastSquaresOptions {
  bool min_norm_fallback = true;
};

/// Unconstrained W minimizing ||AW - B||_F. Solved through the normal
/// equations with a Cholesky factorization; a rank-deficient A falls back to
/// the minimum-norm solution.
inline LinearMap least_squares_map(const Matrix &A, const Matrix &B,
                                   const LeastSquaresOptions &options = {}) {
  if (A.rows() != B.rows() || A.rows() == 0)
    throw DataError("least squares needs equal, non-zero row counts");
  if (!A.allFinite() || !B.allFinite())
    throw DataError("least squares input contains non-finite values");
  Eigen::MatrixXd gram = A.transpose() * A;
  Eigen::MatrixXd rhs = A.transpose() * B;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  bool well_posed = llt.info() == Eigen::Success;
  if (well_posed) {
    Eigen::VectorXd diag = Eigen::MatrixXd(llt.matrixL()).diagonal();
    double lo = diag.cwiseAbs().minCoeff(), hi = diag.cwiseAbs().maxCoeff();
    well_posed = hi > 0 && lo * lo > 1e-12 * hi * hi;
  }
  Matrix w;
  if (well_posed) {
    w = llt.solve(rhs);
  } else if (options.min_norm_fallback) {
    Eigen::MatrixXd ca = A, cb = B;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(ca);
    w = cod.solve(cb);
  } else {
    throw DataError("least squares system is rank deficient");
  }
  return {std::move(w), MapKind::unconstrained, {}, "least-squares"};
}

struct WhiteningPair {
  Matrix inv_sqrt;  // (A^T A)^(-1/2)
  Matrix sqrt;      // (A^T A)^(1/2), the inverse of inv_sqrt
  bool regularized = false;
};

/// Symmetric inverse square root of A^T A through its eigendecomposition.
/// A ridge of 1e-8 * trace / d is added when the spectrum is too spread for a
/// stable inverse.
inline WhiteningPair whitening_pair(const Matrix &A) {
  if (A.rows() == 0 || !A.allFinite())
    throw DataError("whitening needs a non-empty finite matrix");
  Eigen::MatrixXd cov = A.transpose() * A;
  const auto d = cov.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw DataError("eigendecomposition failed");
  WhiteningPair out;
  double top = es.eigenvalues().maxCoeff();
  if (!(top > 0)) throw DataError("covariance is not positive definite");
  if (es.eigenvalues().minCoeff() < 1e-10 * top) {
    double lambda = 1e-8 * cov.trace() / static_cast<double>(d);
    cov += lambda * Eigen::MatrixXd::Identity(d, d);
    es.compute(cov);
    out.regularized = true;
    if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0))
      throw DataError("covariance is not positive definite after regularization");
  }
  const Eigen::MatrixXd &q = es.eigenvectors();
  Eigen::VectorXd root = es.eigenvalues().cwiseSqrt();
  Eigen::MatrixXd inv = q * root.cwiseInverse().asDiagonal() * q.transpose();
  Eigen::MatrixXd fwd = q * root.asDiagonal() * q.transpose();
  out.inv_sqrt = 0.5 * (inv + inv.transpose());
  out.sqrt = 0.5 * (fwd + fwd.transpose());
  return out;
}

inline LinearMap whitening_transform(const Matrix &A) {
  return {whitening_pair(A).inv_sqrt, MapKind::whitening, {}, "whiten"};
}

}  // namespace xlalign

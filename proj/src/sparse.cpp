#include "denoise/sparse.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <string>

#include "denoise/error.hpp"

namespace denoise {

namespace {

// Pivots smaller than this (relative to a unit-norm atom) mean the new atom
// lies in the span of the current support.
constexpr double kSingularPivot = 1e-10;

}  // namespace

Dictionary::Dictionary(Eigen::MatrixXd atoms) : atoms_(std::move(atoms)) {
  if (atoms_.rows() < 1 || atoms_.cols() < 1) throw SizeError("dictionary must be non-empty");
}

void Dictionary::set_atom(int k, const Eigen::VectorXd& values) {
  if (values.size() != atoms_.rows()) throw SizeError("atom length mismatch");
  atoms_.col(k) = values;
}

void Dictionary::normalize() {
  for (Eigen::Index k = 0; k < atoms_.cols(); ++k) {
    const double norm = atoms_.col(k).norm();
    if (!(norm > 0.0)) throw SizeError("cannot normalize zero atom " + std::to_string(k));
    atoms_.col(k) /= norm;
  }
}

Dictionary build_overcomplete_dct(int patch_size, int n_atoms) {
  const int per_axis = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_atoms))));
  if (per_axis * per_axis != n_atoms) {
    throw SizeError("overcomplete DCT needs a square atom count, got " + std::to_string(n_atoms));
  }
  if (n_atoms < patch_size * patch_size) {
    throw SizeError("atom count must be at least patch_size^2");
  }

  Eigen::MatrixXd basis(patch_size, per_axis);
  for (int k = 0; k < per_axis; ++k) {
    for (int t = 0; t < patch_size; ++t) {
      basis(t, k) = std::cos(std::numbers::pi * k * t / per_axis);
    }
    if (k > 0) basis.col(k).array() -= basis.col(k).mean();
    basis.col(k).normalize();
  }

  Eigen::MatrixXd atoms(patch_size * patch_size, n_atoms);
  for (int i = 0; i < per_axis; ++i) {
    for (int j = 0; j < per_axis; ++j) {
      const int k = i * per_axis + j;
      for (int r = 0; r < patch_size; ++r)
        for (int c = 0; c < patch_size; ++c) atoms(r * patch_size + c, k) = basis(r, i) * basis(c, j);
    }
  }
  Dictionary dict(std::move(atoms));
  dict.normalize();
  return dict;
}

OmpCoder::OmpCoder(const Dictionary& dict)
    : dict_(dict), gram_(dict.atoms().transpose() * dict.atoms()) {}

SparseCode OmpCoder::code(std::span<const double> signal, double epsilon, int max_atoms) const {
  const Eigen::MatrixXd& D = dict_.atoms();
  if (static_cast<Eigen::Index>(signal.size()) != D.rows()) {
    throw SizeError("signal length " + std::to_string(signal.size()) + " != atom length " +
                    std::to_string(D.rows()));
  }
  const Eigen::Map<const Eigen::VectorXd> x(signal.data(), static_cast<Eigen::Index>(signal.size()));
  const Eigen::Index n_atoms = D.cols();
  const int limit = static_cast<int>(std::min<Eigen::Index>(std::max(max_atoms, 0), std::min(n_atoms, D.rows())));

  SparseCode out;
  Eigen::VectorXd residual = x;
  double residual_sq = residual.squaredNorm();
  if (residual_sq <= epsilon || limit == 0) {
    out.residual_norm = std::sqrt(residual_sq);
    return out;
  }

  const Eigen::VectorXd projection = D.transpose() * x;
  Eigen::VectorXd correlation = projection;
  std::vector<char> selected(static_cast<std::size_t>(n_atoms), 0);
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(limit, limit);  // lower factor of G_SS
  Eigen::VectorXd gamma;

  int k = 0;
  while (k < limit) {
    Eigen::Index best = -1;
    double best_abs = 0.0;
    for (Eigen::Index j = 0; j < n_atoms; ++j) {
      if (selected[j]) continue;
      const double a = std::abs(correlation(j));
      if (a > best_abs) {
        best_abs = a;
        best = j;
      }
    }
    if (best < 0) break;

    // Extend the Cholesky factor of the support Gram matrix.
    if (k > 0) {
      Eigen::VectorXd g(k);
      for (int i = 0; i < k; ++i) g(i) = gram_(out.support[i], best);
      const Eigen::VectorXd w =
          chol.topLeftCorner(k, k).triangularView<Eigen::Lower>().solve(g);
      const double pivot = gram_(best, best) - w.squaredNorm();
      if (pivot <= kSingularPivot) break;
      chol.block(k, 0, 1, k) = w.transpose();
      chol(k, k) = std::sqrt(pivot);
    } else {
      chol(0, 0) = std::sqrt(gram_(best, best));
    }
    selected[best] = 1;
    out.support.push_back(static_cast<int>(best));
    ++k;

    Eigen::VectorXd rhs(k);
    for (int i = 0; i < k; ++i) rhs(i) = projection(out.support[i]);
    const auto L = chol.topLeftCorner(k, k).triangularView<Eigen::Lower>();
    gamma = L.transpose().solve(L.solve(rhs));

    correlation = projection;
    for (int i = 0; i < k; ++i) correlation -= gamma(i) * gram_.col(out.support[i]);
    // The residual is orthogonal to the support, so ||r||^2 = ||x||^2 - <x, D_S gamma>.
    residual_sq = std::max(x.squaredNorm() - rhs.dot(gamma), 0.0);
    if (residual_sq <= epsilon) break;
  }

  out.coefficients.assign(gamma.data(), gamma.data() + gamma.size());
  residual = x;
  for (int i = 0; i < k; ++i) residual -= gamma(i) * D.col(out.support[i]);
  out.residual_norm = residual.norm();
  return out;
}

SparseCode omp(const Dictionary& dict, std::span<const double> signal, double epsilon,
               int max_atoms) {
  return OmpCoder(dict).code(signal, epsilon, max_atoms);
}

Eigen::VectorXd reconstruct(const Dictionary& dict, const SparseCode& code) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dict.atom_length());
  for (std::size_t i = 0; i < code.support.size(); ++i) {
    out += code.coefficients[i] * dict.atom(code.support[i]);
  }
  return out;
}

void save_dictionary(const Dictionary& dict, const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little, "dictionary dump assumes little-endian");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const nlohmann::json header = {{"format", "ksvd-dictionary"},
                                 {"rows", dict.atom_length()},
                                 {"cols", dict.n_atoms()},
                                 {"dtype", "float64-le"},
                                 {"order", "column-major"}};
  out << header.dump() << '\n';
  const Eigen::MatrixXd& m = dict.atoms();
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!out) throw IoError("failed writing " + path.string());
}

Dictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad dictionary header: " + e.what());
  }
  if (header.value("format", "") != "ksvd-dictionary" || header.value("dtype", "") != "float64-le") {
    throw FormatError(path.string() + ": not a float64 dictionary dump");
  }
  const int rows = header.at("rows").get<int>();
  const int cols = header.at("cols").get<int>();
  Eigen::MatrixXd m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(m.size() * sizeof(double))) {
    throw FormatError(path.string() + ": truncated dictionary payload");
  }
  return Dictionary(std::move(m));
}

}  // namespace denoise

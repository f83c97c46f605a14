#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <span>
#include <vector>

namespace denoise {

// Column-normalized atom matrix, atom_length x n_atoms.
class Dictionary {
 public:
  explicit Dictionary(Eigen::MatrixXd atoms);

  int atom_length() const { return static_cast<int>(atoms_.rows()); }
  int n_atoms() const { return static_cast<int>(atoms_.cols()); }
  const Eigen::MatrixXd& atoms() const { return atoms_; }

  auto atom(int k) const { return atoms_.col(k); }
  void set_atom(int k, const Eigen::VectorXd& values);

  // Rescales every column to unit Euclidean norm. Zero columns are an error.
  void normalize();

 private:
  Eigen::MatrixXd atoms_;
};

struct SparseCode {
  std::vector<int> support;  // selection order
  std::vector<double> coefficients;
  double residual_norm = 0.0;  // ||signal - D x||_2

  std::size_t size() const { return support.size(); }
};

// Separable overcomplete DCT: sqrt(n_atoms) cosine atoms per axis, every
// non-constant 1D atom mean-removed, outer products normalized.
Dictionary build_overcomplete_dct(int patch_size, int n_atoms);

// Orthogonal matching pursuit against a fixed dictionary. Precomputes the
// Gram matrix so that coding many signals only costs O(K * |support|) per
// greedy step beyond the initial projection.
class OmpCoder {
 public:
  explicit OmpCoder(const Dictionary& dict);

  // Greedy selection until ||residual||^2 <= epsilon or |support| == max_atoms.
  // Ties between equally correlated atoms go to the lowest index. An atom that
  // would make the support system numerically singular is dropped and
  // selection stops.
  SparseCode code(std::span<const double> signal, double epsilon, int max_atoms) const;

  const Dictionary& dictionary() const { return dict_; }

 private:
  const Dictionary& dict_;
  Eigen::MatrixXd gram_;
};

SparseCode omp(const Dictionary& dict, std::span<const double> signal, double epsilon,
               int max_atoms);

// D x for a sparse code.
Eigen::VectorXd reconstruct(const Dictionary& dict, const SparseCode& code);

// Single JSON header line followed by rows*cols little-endian float64 values
// in column-major order.
void save_dictionary(const Dictionary& dict, const std::filesystem::path& path);
Dictionary load_dictionary(const std::filesystem::path& path);

}  // namespace denoise

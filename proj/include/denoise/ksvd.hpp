#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <vector>

#include "denoise/image.hpp"
#include "denoise/patches.hpp"
#include "denoise/sparse.hpp"

namespace denoise {

struct KsvdParams {
  int patch_size = 8;
  int n_atoms = 256;
  int train_iterations = 10;
  double gain = 1.15;           // C in the OMP error target n^2 (C sigma)^2
  double lambda_factor = 30.0;  // noisy-image fidelity weight is lambda_factor / sigma
  int max_train_patches = 40000;
  int stride = 1;  // coding stride
  std::uint64_t subsample_seed = 0;
  double sigma = 0.0;

  static KsvdParams for_sigma(double sigma);

  double lambda() const { return lambda_factor / sigma; }
  double omp_epsilon() const;
  int max_atoms() const { return patch_size * patch_size / 2; }

  void validate() const;
};

// Reads optional overrides: patch_size, n_atoms, train_iterations, gain,
// lambda_factor, max_train_patches, stride, subsample_seed.
KsvdParams ksvd_params_from_json(const nlohmann::json& j, double sigma);

// Alternating sparse-coding / per-atom SVD refinement over a fixed training
// set. Exposed stepwise so each atom update can be observed.
class KsvdTrainer {
 public:
  // signals: one training vector per column.
  KsvdTrainer(Eigen::MatrixXd signals, Dictionary initial);

  // Codes every training signal with OMP and refreshes the residual matrix.
  void sparse_code(double epsilon, int max_atoms);

  // Refits atom k and its coefficient row to the leading singular pair of the
  // restricted residual. An atom no signal uses is replaced by the normalized
  // training signal with the largest current residual (each signal donates at
  // most once per sweep). Returns false when the atom was replaced.
  bool update_atom(int k);

  // One full K-SVD iteration: sparse_code, then update_atom for k = 0..K-1.
  void iterate(double epsilon, int max_atoms);

  // Sum over signals of ||y - D x||^2.
  double representation_error() const;

  const Dictionary& dictionary() const { return dict_; }
  const std::vector<SparseCode>& codes() const { return codes_; }
  const Eigen::MatrixXd& residual() const { return residual_; }

 private:
  Eigen::MatrixXd signals_;
  Dictionary dict_;
  std::vector<SparseCode> codes_;
  Eigen::MatrixXd residual_;
  std::vector<char> donated_;
};

// Trains from dict0 on mean-removed patches for params.train_iterations
// iterations. Throws SizeError with fewer patches than atoms.
Dictionary ksvd_train(const PatchSet& patches, Dictionary dict0, const KsvdParams& params);

// Deterministic uniform subsample of `available` indices down to at most
// `wanted`, phase-shifted by `seed`.
std::vector<std::size_t> subsample_indices(std::size_t available, std::size_t wanted,
                                           std::uint64_t seed);

struct KsvdResult {
  Image image;
  Dictionary dictionary;
};

KsvdResult denoise_ksvd_full(const Image& noisy, const KsvdParams& params);
Image denoise_ksvd(const Image& noisy, const KsvdParams& params);

}  // namespace denoise

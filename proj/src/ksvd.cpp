#include "denoise/ksvd.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <string>

#include "denoise/error.hpp"
#include "denoise/noise.hpp"

namespace denoise {

namespace {

constexpr std::uint64_t kSubsampleStream = 0x6b7376642d737562ULL;

Eigen::MatrixXd mean_removed_columns(const PatchSet& patches,
                                     const std::vector<std::size_t>& indices) {
  const auto n = static_cast<Eigen::Index>(patches.patch_length());
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(indices.size()));
  for (std::size_t t = 0; t < indices.size(); ++t) {
    const auto p = patches.patch(indices[t]);
    const Eigen::Map<const Eigen::VectorXd> v(p.data(), n);
    out.col(static_cast<Eigen::Index>(t)) = v.array() - v.mean();
  }
  return out;
}

}  // namespace

KsvdParams KsvdParams::for_sigma(double sigma) {
  KsvdParams p;
  p.sigma = sigma;
  return p;
}

double KsvdParams::omp_epsilon() const {
  const double target = gain * sigma;
  return patch_size * patch_size * target * target;
}

void KsvdParams::validate() const {
  if (patch_size < 1 || n_atoms < 1 || train_iterations < 0 || max_train_patches < 1 || stride < 1) {
    throw ConfigError("ksvd sizes and counts must be positive");
  }
  if (patch_size * patch_size > n_atoms) throw ConfigError("ksvd needs patch_size^2 <= n_atoms");
  if (!(gain > 0.0) || !(lambda_factor > 0.0)) throw ConfigError("ksvd gain and lambda must be > 0");
  if (!(sigma > 0.0)) throw ConfigError("ksvd sigma must be > 0");
}

KsvdParams ksvd_params_from_json(const nlohmann::json& j, double sigma) {
  KsvdParams p = KsvdParams::for_sigma(sigma);
  p.patch_size = j.value("patch_size", p.patch_size);
  p.n_atoms = j.value("n_atoms", p.n_atoms);
  p.train_iterations = j.value("train_iterations", p.train_iterations);
  p.gain = j.value("gain", p.gain);
  p.lambda_factor = j.value("lambda_factor", p.lambda_factor);
  p.max_train_patches = j.value("max_train_patches", p.max_train_patches);
  p.stride = j.value("stride", p.stride);
  p.subsample_seed = j.value("subsample_seed", p.subsample_seed);
  p.validate();
  return p;
}

KsvdTrainer::KsvdTrainer(Eigen::MatrixXd signals, Dictionary initial)
    : signals_(std::move(signals)),
      dict_(std::move(initial)),
      codes_(static_cast<std::size_t>(signals_.cols())),
      residual_(signals_),
      donated_(static_cast<std::size_t>(signals_.cols()), 0) {
  if (signals_.rows() != dict_.atom_length()) {
    throw SizeError("training signals have length " + std::to_string(signals_.rows()) +
                    ", dictionary atoms " + std::to_string(dict_.atom_length()));
  }
  for (Eigen::Index j = 0; j < signals_.cols(); ++j) codes_[j].residual_norm = signals_.col(j).norm();
}

void KsvdTrainer::sparse_code(double epsilon, int max_atoms) {
  const OmpCoder coder(dict_);
  const auto n = signals_.rows();
  for (Eigen::Index j = 0; j < signals_.cols(); ++j) {
    codes_[j] = coder.code(std::span<const double>(signals_.col(j).data(), static_cast<std::size_t>(n)),
                           epsilon, max_atoms);
    residual_.col(j) = signals_.col(j) - reconstruct(dict_, codes_[j]);
  }
  std::fill(donated_.begin(), donated_.end(), 0);
}

bool KsvdTrainer::update_atom(int k) {
  struct User {
    Eigen::Index signal;
    std::size_t slot;
  };
  std::vector<User> users;
  for (Eigen::Index j = 0; j < signals_.cols(); ++j) {
    const auto& support = codes_[j].support;
    const auto it = std::find(support.begin(), support.end(), k);
    if (it != support.end()) users.push_back({j, static_cast<std::size_t>(it - support.begin())});
  }

  if (users.empty()) {
    Eigen::Index worst = -1;
    double worst_err = -1.0;
    for (Eigen::Index j = 0; j < signals_.cols(); ++j) {
      if (donated_[j]) continue;
      const double err = residual_.col(j).squaredNorm();
      if (err > worst_err) {
        worst_err = err;
        worst = j;
      }
    }
    if (worst < 0) return false;
    donated_[worst] = 1;
    const double norm = signals_.col(worst).norm();
    if (norm > 0.0) dict_.set_atom(k, signals_.col(worst) / norm);
    return false;
  }

  const Eigen::VectorXd old_atom = dict_.atom(k);
  Eigen::MatrixXd restricted(signals_.rows(), static_cast<Eigen::Index>(users.size()));
  for (std::size_t t = 0; t < users.size(); ++t) {
    const auto& u = users[t];
    restricted.col(static_cast<Eigen::Index>(t)) =
        residual_.col(u.signal) + codes_[u.signal].coefficients[u.slot] * old_atom;
  }

  // Leading left singular vector of the restricted residual from its
  // atom_length x atom_length Gram matrix.
  const Eigen::MatrixXd scatter = restricted * restricted.transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scatter);
  Eigen::VectorXd atom = eig.eigenvectors().col(scatter.rows() - 1);
  if (!(eig.eigenvalues()(scatter.rows() - 1) > 0.0)) atom = old_atom;
  if (atom.dot(old_atom) < 0.0) atom = -atom;
  atom.normalize();

  const Eigen::RowVectorXd coeffs = atom.transpose() * restricted;
  dict_.set_atom(k, atom);
  for (std::size_t t = 0; t < users.size(); ++t) {
    const auto& u = users[t];
    const auto col = static_cast<Eigen::Index>(t);
    codes_[u.signal].coefficients[u.slot] = coeffs(col);
    residual_.col(u.signal) = restricted.col(col) - coeffs(col) * atom;
    codes_[u.signal].residual_norm = residual_.col(u.signal).norm();
  }
  return true;
}

void KsvdTrainer::iterate(double epsilon, int max_atoms) {
  sparse_code(epsilon, max_atoms);
  for (int k = 0; k < dict_.n_atoms(); ++k) update_atom(k);
  dict_.normalize();
}

double KsvdTrainer::representation_error() const { return residual_.squaredNorm(); }

Dictionary ksvd_train(const PatchSet& patches, Dictionary dict0, const KsvdParams& params) {
  params.validate();
  if (patches.count() < static_cast<std::size_t>(dict0.n_atoms())) {
    throw SizeError("K-SVD needs at least " + std::to_string(dict0.n_atoms()) +
                    " training patches, got " + std::to_string(patches.count()));
  }
  const auto n = static_cast<Eigen::Index>(patches.patch_length());
  const Eigen::Map<const Eigen::MatrixXd> signals(patches.values.data(), n,
                                                  static_cast<Eigen::Index>(patches.count()));
  KsvdTrainer trainer(signals, std::move(dict0));
  for (int it = 0; it < params.train_iterations; ++it) {
    trainer.iterate(params.omp_epsilon(), params.max_atoms());
  }
  return trainer.dictionary();
}

std::vector<std::size_t> subsample_indices(std::size_t available, std::size_t wanted,
                                           std::uint64_t seed) {
  std::vector<std::size_t> out;
  if (available <= wanted) {
    out.resize(available);
    for (std::size_t i = 0; i < available; ++i) out[i] = i;
    return out;
  }
  const double step = static_cast<double>(available) / static_cast<double>(wanted);
  const double phase = rng::uniform(seed, kSubsampleStream, 0);
  out.reserve(wanted);
  for (std::size_t i = 0; i < wanted; ++i) {
    out.push_back(std::min(available - 1, static_cast<std::size_t>((static_cast<double>(i) + phase) * step)));
  }
  return out;
}

KsvdResult denoise_ksvd_full(const Image& noisy, const KsvdParams& params) {
  params.validate();
  if (noisy.width() < params.patch_size || noisy.height() < params.patch_size) {
    throw SizeError("image " + std::to_string(noisy.width()) + "x" + std::to_string(noisy.height()) +
                    " is smaller than the " + std::to_string(params.patch_size) + "-pixel patch");
  }

  const PatchSet all = extract_patches(noisy, params.patch_size, 1);
  const auto train_idx = subsample_indices(all.count(),
                                           static_cast<std::size_t>(params.max_train_patches),
                                           params.subsample_seed);
  if (train_idx.size() < static_cast<std::size_t>(params.n_atoms)) {
    throw SizeError("image yields " + std::to_string(train_idx.size()) +
                    " patches, fewer than the " + std::to_string(params.n_atoms) + " atoms to train");
  }

  KsvdTrainer trainer(mean_removed_columns(all, train_idx),
                      build_overcomplete_dct(params.patch_size, params.n_atoms));
  for (int it = 0; it < params.train_iterations; ++it) {
    trainer.iterate(params.omp_epsilon(), params.max_atoms());
  }
  Dictionary dict = trainer.dictionary();

  const PatchSet coded = params.stride == 1 ? all : extract_patches(noisy, params.patch_size, params.stride);
  const OmpCoder coder(dict);
  PatchAccumulator acc(noisy.width(), noisy.height());
  const auto n = static_cast<Eigen::Index>(coded.patch_length());
  Eigen::VectorXd centred(n);
  for (std::size_t i = 0; i < coded.count(); ++i) {
    const auto p = coded.patch(i);
    const Eigen::Map<const Eigen::VectorXd> v(p.data(), n);
    const double mean = v.mean();
    centred = v.array() - mean;
    const SparseCode code = coder.code(std::span<const double>(centred.data(), centred.size()),
                                       params.omp_epsilon(), params.max_atoms());
    const Eigen::VectorXd recon = (reconstruct(dict, code).array() + mean).matrix();
    acc.add(coded.origins[i], coded.patch_size, std::span<const double>(recon.data(), recon.size()), 1.0);
  }

  const double lambda = params.lambda();
  Image out(noisy.width(), noisy.height());
  auto px = out.pixels();
  const auto in = noisy.pixels();
  const auto num = acc.numerator();
  const auto den = acc.denominator();
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = (lambda * in[i] + num[i]) / (lambda + den[i]);
  return {std::move(out), std::move(dict)};
}

Image denoise_ksvd(const Image& noisy, const KsvdParams& params) {
  return denoise_ksvd_full(noisy, params).image;
}

}  // namespace denoise

#include "mvembed/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "mvembed/error.hpp"
#include "mvembed/random.hpp"

namespace mvembed {

MultiViewDataset generate_synthetic(const SynthSpec& spec) {
  if (spec.n_classes < 1 || spec.n < spec.n_classes) {
    throw Error(ErrorCode::InvalidSpec, "synthetic spec needs n >= n_classes >= 1");
  }
  if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma)) {
    throw Error(ErrorCode::InvalidSpec, "noise_sigma must be finite and >= 0");
  }
  if (spec.views.empty()) throw Error(ErrorCode::InvalidSpec, "synthetic spec needs at least one view");

  const std::size_t n = spec.n;
  std::vector<int> labels(n);
  Eigen::Matrix2Xd latent(2, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % spec.n_classes;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) /
                         static_cast<double>(spec.n_classes);
    labels[i] = static_cast<int>(c);
    latent(0, i) = spec.separation * std::cos(angle);
    latent(1, i) = spec.separation * std::sin(angle);
  }

  std::vector<ViewMatrix> views;
  for (std::size_t v = 0; v < spec.views.size(); ++v) {
    const auto& vs = spec.views[v];
    if (vs.dim < 1) throw Error(ErrorCode::InvalidSpec, "view dimension must be >= 1");
    Rng lift_rng(derive_seed(spec.seed, "lift/" + std::to_string(v)));
    Rng noise_rng(derive_seed(spec.seed, "noise/" + std::to_string(v)));

    Eigen::MatrixXd lift(vs.dim, 2);
    for (Eigen::Index c = 0; c < 2; ++c) {
      for (Eigen::Index r = 0; r < lift.rows(); ++r) lift(r, c) = lift_rng.normal();
    }
    lift.col(0) *= vs.signal_x;
    lift.col(1) *= vs.signal_y;

    Eigen::MatrixXd x = lift * latent;
    if (spec.noise_sigma > 0.0) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, c) += spec.noise_sigma * noise_rng.normal();
      }
    }
    views.push_back({std::move(x), vs.name.empty() ? "view" + std::to_string(v) : vs.name});
  }
  return MultiViewDataset::make(std::move(views), std::move(labels));
}

}  // namespace mvembed

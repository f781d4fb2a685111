#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvembed/dataset.hpp"

namespace mvembed {

struct SynthViewSpec {
  std::size_t dim = 10;
  /// Scales the two latent coordinates before the random lift. {1, 0.2}
  /// makes a view that mostly sees the first latent axis.
  double signal_x = 1.0;
  double signal_y = 1.0;
  std::string name;
};

/// Class-clustered 2-D latent points lifted into each view.
///
/// Class c sits at separation * (cos 2πc/C, sin 2πc/C); sample i belongs to
/// class i mod C. Each view v applies a random Gaussian lift A_v (D_v x 2,
/// entries N(0,1)) to the signal-scaled latent point and adds independent
/// N(0, noise_sigma²) noise per feature. With noise_sigma = 0 all samples of a
/// class coincide in every view.
struct SynthSpec {
  std::size_t n = 300;
  std::size_t n_classes = 3;
  double noise_sigma = 0.5;
  double separation = 1.0;
  std::uint64_t seed = 7;
  std::vector<SynthViewSpec> views{{20, 1.0, 1.0, "view0"}, {30, 1.0, 1.0, "view1"}};
};

MultiViewDataset generate_synthetic(const SynthSpec& spec);

}  // namespace mvembed

#include "kernel_math.hpp"

#include <cmath>

namespace hardi::detail {

void gaussian_from_dots(double* dots, const double* norms, double self_norm, double gamma,
                        const int* labels, int label_self, std::size_t count) {
  for (std::size_t t = 0; t < count; ++t) {
    double d2 = self_norm + norms[t] - 2.0 * dots[t];
    d2 = d2 > 0.0 ? d2 : 0.0;
    dots[t] = std::exp(-gamma * d2);
  }
  if (labels != nullptr) {
    for (std::size_t t = 0; t < count; ++t) dots[t] *= static_cast<double>(labels[t] * label_self);
  }
}

}  // namespace hardi::detail

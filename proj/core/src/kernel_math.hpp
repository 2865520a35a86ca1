#pragma once

#include <cstddef>

namespace hardi::detail {

// dots[t] <- sign_t * exp(-gamma * max(0, self_norm + norms[t] - 2 dots[t])),
// sign_t = labels ? labels[t] * label_self : 1. Compiled with vector math.
void gaussian_from_dots(double* dots, const double* norms, double self_norm, double gamma,
                        const int* labels, int label_self, std::size_t count);

}  // namespace hardi::detail

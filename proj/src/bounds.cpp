#include "convextest/bounds.h"

#include <cmath>
#include <string>

#include "convextest/errors.h"
#include "convextest/normal.h"

namespace convextest {

double epsilon_star(double rho) {
  if (!(rho >= 0.0)) throw InvalidArgument("rho", "must be nonnegative");
  return normal_sf(0.5 * rho);
}

Bound bound_gjn(double gap_tilde, double delta_raw) {
  if (!(gap_tilde > 0.0)) throw InvalidArgument("gap_tilde", "must be positive");
  if (!(delta_raw >= 0.0)) throw InvalidArgument("delta_raw", "must be nonnegative");
  const double value = normal_sf(0.5 * gap_tilde - delta_raw / gap_tilde);
  return {value, value > 0.5};
}

Bound bound_exact_reference(double rho_star, double delta_raw) {
  if (!(delta_raw >= 0.0)) throw InvalidArgument("delta_raw", "must be nonnegative");
  const double root = std::sqrt(delta_raw);
  if (!(rho_star > root))
    throw InvalidRegime("bound_exact_reference needs rho_star > sqrt(delta_raw); got rho_star=" +
                        std::to_string(rho_star) + ", sqrt(delta_raw)=" + std::to_string(root));
  const double value = normal_sf(0.5 * rho_star - 0.5 * root - delta_raw / (rho_star - root));
  return {value, value > 0.5};
}

Bound bound_normalized_reference(double rho_star, double delta_norm) {
  if (!(rho_star >= 0.0)) throw InvalidArgument("rho_star", "must be nonnegative");
  if (!(delta_norm >= 0.0)) throw InvalidArgument("delta_norm", "must be nonnegative");
  const double value = normal_sf((0.5 - delta_norm) * rho_star / (1.0 + std::sqrt(delta_norm)));
  return {value, delta_norm >= 0.5};
}

}  // namespace convextest

#include "flightcore/dynamics/quad_params.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "flightcore/errors.hpp"

namespace flightcore {

namespace {

const char* first_violation(const QuadParams& p) {
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(p.mass) || p.mass <= 0.0) return "mass must be > 0";
  if (!finite(p.arm_length) || p.arm_length <= 0.0) return "arm_length must be > 0";
  if (!p.inertia.allFinite() || (p.inertia.array() <= 0.0).any()) return "inertia diagonal must be > 0";
  if (!p.drag.allFinite() || (p.drag.array() < 0.0).any()) return "drag coefficients must be >= 0";
  if (!finite(p.kappa)) return "kappa must be finite";
  if (!finite(p.motor_tau) || p.motor_tau <= 0.0) return "motor_tau must be > 0";
  if (!finite(p.thrust_min) || !finite(p.thrust_max) || p.thrust_min < 0.0 ||
      p.thrust_min >= p.thrust_max)
    return "thrust limits must satisfy 0 <= thrust_min < thrust_max";
  if (!finite(p.gravity)) return "gravity must be finite";
  return nullptr;
}

}  // namespace

void QuadParams::validate() const {
  if (const char* why = first_violation(*this)) {
    throw ContractViolation(std::string("invalid QuadParams: ") + why);
  }
}

bool QuadParams::valid() const noexcept { return first_violation(*this) == nullptr; }

std::uint64_t QuadParams::digest() const {
  const double fields[] = {mass,    arm_length, inertia.x(), inertia.y(), inertia.z(),
                           drag.x(), drag.y(),  drag.z(),    kappa,       motor_tau,
                           thrust_min, thrust_max, gravity};
  std::uint64_t h = 14695981039346656037ull;
  for (double d : fields) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

}  // namespace flightcore

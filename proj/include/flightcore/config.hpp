#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "flightcore/control/rate_controller.hpp"
#include "flightcore/dynamics/quad_params.hpp"
#include "flightcore/sensing/imu.hpp"

namespace flightcore {

/// Plain-text `key = value` configuration shared by every module.
/// Blank lines and `#` comments are ignored; later keys override earlier ones.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text, const std::string& origin = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(std::string_view key) const { return values_.find(std::string(key)) != values_.end(); }
  std::optional<std::string> get(std::string_view key) const;
  void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }

  std::string get_string(std::string_view key, std::string fallback) const;
  double get_double(std::string_view key, double fallback) const;
  long long get_int(std::string_view key, long long fallback) const;

  const std::map<std::string, std::string, std::less<>>& entries() const { return values_; }
  const std::string& origin() const { return origin_; }

 private:
  std::map<std::string, std::string, std::less<>> values_;
  std::string origin_ = "<empty>";
};

/// Keys: mass, arm_length, inertia_xx/yy/zz, drag_x/y/z, kappa, motor_tau,
/// thrust_min, thrust_max. Missing keys keep the defaults. Validates.
QuadParams load_quad_params(const KeyValueConfig& cfg, QuadParams defaults = {});

/// Keys: rate_kp_x, rate_kp_y, rate_kp_z.
RateGains load_rate_gains(const KeyValueConfig& cfg, RateGains defaults = {});

/// Keys: imu_accel_std, imu_gyro_std, imu_accel_bias_{x,y,z}, imu_gyro_bias_{x,y,z}.
ImuNoiseModel load_imu_noise(const KeyValueConfig& cfg, ImuNoiseModel defaults = {});

}  // namespace flightcore

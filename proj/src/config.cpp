#include "flightcore/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "flightcore/errors.hpp"

namespace flightcore {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigurationError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigurationError(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    cfg.values_[std::string(key)] = std::string(value);
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::optional<std::string> KeyValueConfig::get(std::string_view key) const {
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  return std::nullopt;
}

std::string KeyValueConfig::get_string(std::string_view key, std::string fallback) const {
  auto v = get(key);
  return v ? *v : std::move(fallback);
}

double KeyValueConfig::get_double(std::string_view key, double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  double out = 0.0;
  const auto* end = v->data() + v->size();
  auto [ptr, ec] = std::from_chars(v->data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigurationError(origin_ + ": key '" + std::string(key) + "' is not a number: '" + *v + "'");
  }
  return out;
}

long long KeyValueConfig::get_int(std::string_view key, long long fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  long long out = 0;
  const auto* end = v->data() + v->size();
  auto [ptr, ec] = std::from_chars(v->data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigurationError(origin_ + ": key '" + std::string(key) + "' is not an integer: '" + *v + "'");
  }
  return out;
}

QuadParams load_quad_params(const KeyValueConfig& cfg, QuadParams p) {
  p.mass = cfg.get_double("mass", p.mass);
  p.arm_length = cfg.get_double("arm_length", p.arm_length);
  p.inertia = Vec3(cfg.get_double("inertia_xx", p.inertia.x()),
                   cfg.get_double("inertia_yy", p.inertia.y()),
                   cfg.get_double("inertia_zz", p.inertia.z()));
  p.drag = Vec3(cfg.get_double("drag_x", p.drag.x()), cfg.get_double("drag_y", p.drag.y()),
                cfg.get_double("drag_z", p.drag.z()));
  p.kappa = cfg.get_double("kappa", p.kappa);
  p.motor_tau = cfg.get_double("motor_tau", p.motor_tau);
  p.thrust_min = cfg.get_double("thrust_min", p.thrust_min);
  p.thrust_max = cfg.get_double("thrust_max", p.thrust_max);
  p.validate();
  return p;
}

RateGains load_rate_gains(const KeyValueConfig& cfg, RateGains g) {
  g.kp = Vec3(cfg.get_double("rate_kp_x", g.kp.x()), cfg.get_double("rate_kp_y", g.kp.y()),
              cfg.get_double("rate_kp_z", g.kp.z()));
  g.validate();
  return g;
}

ImuNoiseModel load_imu_noise(const KeyValueConfig& cfg, ImuNoiseModel n) {
  n.accel_noise_std = cfg.get_double("imu_accel_std", n.accel_noise_std);
  n.gyro_noise_std = cfg.get_double("imu_gyro_std", n.gyro_noise_std);
  n.accel_bias = Vec3(cfg.get_double("imu_accel_bias_x", n.accel_bias.x()),
                      cfg.get_double("imu_accel_bias_y", n.accel_bias.y()),
                      cfg.get_double("imu_accel_bias_z", n.accel_bias.z()));
  n.gyro_bias = Vec3(cfg.get_double("imu_gyro_bias_x", n.gyro_bias.x()),
                     cfg.get_double("imu_gyro_bias_y", n.gyro_bias.y()),
                     cfg.get_double("imu_gyro_bias_z", n.gyro_bias.z()));
  n.validate();
  return n;
}

}  // namespace flightcore

#pragma once

#include <memory>
#include <span>
#include <string_view>

#include "flightcore/control/rate_controller.hpp"
#include "flightcore/tasks/tasks.hpp"

namespace flightcore {

/// Produces task actions (TaskSpec::action_dim() wide) from the true state.
class ScriptedController {
 public:
  virtual ~ScriptedController() = default;
  virtual void act(const QuadState& state, const TaskSpec& spec, RngStream& rng,
                   std::span<double> action) = 0;
};

/// Cascaded position/attitude controller that holds the task target.
/// From an exact hover at the target it commands exactly c = g and zero
/// rates, so the vehicle stays put.
class HoverController final : public ScriptedController {
 public:
  struct Gains {
    double kp_pos = 2.0;
    double kd_pos = 2.5;
    double k_att = 5.0;
    double k_yaw = 2.0;
    double max_tilt = 0.6;  // [rad]
  };

  HoverController(QuadParams params, RateGains rate_gains, Gains gains);
  HoverController(QuadParams params, RateGains rate_gains)
      : HoverController(std::move(params), rate_gains, Gains{}) {}

  BodyRateCmd body_rate_command(const QuadState& state, const TaskSpec& spec) const;
  void act(const QuadState& state, const TaskSpec& spec, RngStream& rng,
           std::span<double> action) override;

 private:
  QuadParams params_;
  RateGains rate_gains_;
  Gains gains_;
};

/// Uniform actions: c in [0, 2 g], rates in [-pi, pi] rad/s for body-rate
/// tasks; thrusts in [thrust_min, thrust_max] otherwise.
class RandomController final : public ScriptedController {
 public:
  explicit RandomController(QuadParams params) : params_(std::move(params)) {}
  void act(const QuadState& state, const TaskSpec& spec, RngStream& rng,
           std::span<double> action) override;

 private:
  QuadParams params_;
};

/// "hover" | "random". Throws ArgumentError for anything else.
std::unique_ptr<ScriptedController> make_controller(std::string_view name, const QuadParams& params,
                                                    const RateGains& rate_gains);

}  // namespace flightcore

#include "gait/env.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "gait/errors.hpp"
#include "gait/rng.hpp"

namespace gait {

namespace {

void append_field(std::string& out, const char* name, double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    out.append(name);
    out.push_back('=');
    out.append(buf, ptr);
    out.push_back(';');
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

MuscleAction MuscleAction::from_span(std::span<const double> values) {
    if (values.size() != kActionDim) {
        throw ShapeError("action must have exactly " + std::to_string(kActionDim) +
                         " excitations, got " + std::to_string(values.size()));
    }
    MuscleAction a;
    std::copy(values.begin(), values.end(), a.excitations.begin());
    return a;
}

std::uint64_t env_fingerprint(const EnvConfig& cfg) {
    std::string s;
    append_field(s, "target_velocity", cfg.target_velocity);
    append_field(s, "dt", cfg.dt);
    append_field(s, "mass", cfg.mass);
    append_field(s, "gravity", cfg.gravity);
    append_field(s, "rest_height", cfg.rest_height);
    append_field(s, "spring_k", cfg.spring_k);
    append_field(s, "spring_c", cfg.spring_c);
    append_field(s, "drive_scale", cfg.drive_scale);
    append_field(s, "drag_c", cfg.drag_c);
    append_field(s, "fall_fraction", cfg.fall_fraction);
    append_field(s, "max_steps", static_cast<double>(cfg.max_steps));
    append_field(s, "mix_seed", static_cast<double>(cfg.mix_seed));
    return fnv1a(s);
}

double reward_fn(double v, double v_star) {
    const double err = v_star - v;
    return 9.0 - err * err;
}

Environment::Environment(const EnvConfig& cfg) : cfg_(cfg), rng_(0) {
    if (!(cfg.dt > 0.0)) throw ConfigError("env: dt must be > 0");
    if (!(cfg.mass > 0.0)) throw ConfigError("env: mass must be > 0");
    if (!(cfg.rest_height > 0.0)) throw ConfigError("env: rest_height must be > 0");
    const double stiffness_ratio = cfg.spring_k * cfg.dt * cfg.dt / cfg.mass;
    if (!(stiffness_ratio < 1.0)) {
        throw ConfigError("env: integration unstable, spring_k*dt^2/mass = " +
                          std::to_string(stiffness_ratio) + " must be < 1");
    }
    if (!(cfg.fall_fraction > 0.0 && cfg.fall_fraction < 1.0)) {
        throw ConfigError("env: fall_fraction must lie in (0, 1)");
    }
    if (cfg.max_steps < 1) throw ConfigError("env: max_steps must be >= 1");

    fingerprint_ = env_fingerprint(cfg);
    Rng mix_rng(cfg.mix_seed);
    for (double& w : mix_) w = mix_rng.uniform(-1.0, 1.0);
    reset(0);
}

Observation Environment::reset(std::uint64_t episode_seed) {
    pelvis_y_ = cfg_.rest_height;
    vel_x_ = 0.0;
    vel_y_ = 0.0;
    step_index_ = 0;
    done_ = false;
    fall_ = false;
    rng_.seed(episode_seed);
    return observe();
}

StepResult Environment::step(std::span<const double> action) {
    return step(MuscleAction::from_span(action));
}

StepResult Environment::step(const MuscleAction& action) {
    if (done_) throw UsageError("env: step() on a finished episode; reset() first");

    double support = 0.0;
    for (int i = 0; i < kSupportMuscles; ++i) support += clamp01(action.excitations[i]);
    support /= kSupportMuscles;

    double drive = 0.0;
    for (int i = 0; i < kDriveMuscles; ++i) {
        drive += mix_[i] * clamp01(action.excitations[kSupportMuscles + i]);
    }

    const double force_y =
        support * (cfg_.spring_k * (cfg_.rest_height - pelvis_y_) - cfg_.spring_c * vel_y_) -
        cfg_.mass * cfg_.gravity;
    const double force_x = cfg_.drive_scale * drive / kDriveMuscles - cfg_.drag_c * vel_x_;

    // Semi-implicit Euler: velocities first, position second.
    vel_y_ += cfg_.dt * force_y / cfg_.mass;
    vel_x_ += cfg_.dt * force_x / cfg_.mass;
    pelvis_y_ += cfg_.dt * vel_y_;

    ++step_index_;
    ++lifetime_steps_;
    fall_ = pelvis_y_ < cfg_.fall_fraction * cfg_.rest_height;
    done_ = fall_ || step_index_ >= cfg_.max_steps;

    return {observe(), reward_fn(vel_x_, cfg_.target_velocity), done_, fall_};
}

EnvSnapshot Environment::snapshot() const {
    EnvSnapshot s;
    s.pelvis_y = pelvis_y_;
    s.vel_x = vel_x_;
    s.vel_y = vel_y_;
    s.step_index = step_index_;
    s.done = done_;
    s.fall = fall_;
    s.rng = rng_;
    s.fingerprint = fingerprint_;
    return s;
}

void Environment::restore(const EnvSnapshot& snap) {
    if (snap.fingerprint != fingerprint_) {
        throw CompatibilityError("env: snapshot belongs to a differently configured environment");
    }
    pelvis_y_ = snap.pelvis_y;
    vel_x_ = snap.vel_x;
    vel_y_ = snap.vel_y;
    step_index_ = snap.step_index;
    done_ = snap.done;
    fall_ = snap.fall;
    rng_ = snap.rng;
}

Observation Environment::observe() const {
    Observation o;
    o.height = pelvis_y_ / cfg_.rest_height;
    o.vel_y = vel_y_;
    o.vel_x = vel_x_;
    o.vel_error = cfg_.target_velocity - vel_x_;
    return o;
}

MuscleAction oracle_controller(const Observation& obs,
                               const std::array<double, kDriveMuscles>& drive_weights,
                               double gain) {
    MuscleAction a;
    for (int i = 0; i < kSupportMuscles; ++i) a.excitations[i] = 1.0;
    for (int i = 0; i < kDriveMuscles; ++i) {
        const double sign = drive_weights[i] > 0.0 ? 1.0 : (drive_weights[i] < 0.0 ? -1.0 : 0.0);
        a.excitations[kSupportMuscles + i] = clamp01(0.5 + gain * obs.vel_error * sign);
    }
    return a;
}

}  // namespace gait

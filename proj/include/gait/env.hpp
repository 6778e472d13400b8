#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>

namespace gait {

inline constexpr int kActionDim = 19;      // muscle excitations
inline constexpr int kSupportMuscles = 10; // excitations 0..9 hold the pelvis up
inline constexpr int kDriveMuscles = 9;    // excitations 10..18 push it horizontally
inline constexpr int kObsDim = 4;

// 19 bounded muscle excitations. Values are clamped to [0,1] at the
// environment boundary; policies may hand in slightly out-of-range values.
struct MuscleAction {
    std::array<double, kActionDim> excitations{};

    // Validating constructor for dynamically sized sources. Throws ShapeError
    // when the span is not exactly 19 long.
    static MuscleAction from_span(std::span<const double> values);
};

struct EnvConfig {
    double target_velocity = 3.0;  // m/s, the v* in the reward
    double dt = 0.01;              // s
    double mass = 75.0;            // kg
    double gravity = 9.81;         // m/s^2
    double rest_height = 0.91;     // m, pelvis height with the leg relaxed
    double spring_k = 2.0e4;       // N/m, leg spring at full engagement
    double spring_c = 500.0;       // N*s/m, leg damping at full engagement
    double drive_scale = 2000.0;   // N, horizontal force at full drive
    double drag_c = 200.0;         // N*s/m
    double fall_fraction = 0.6;    // episode ends below fall_fraction*rest_height
    int max_steps = 1000;
    std::uint64_t mix_seed = 7;    // seeds the drive-weight mix
};

// Stable 64-bit fingerprint of a config; guards snapshots and checkpoints
// against being replayed into a differently configured environment.
std::uint64_t env_fingerprint(const EnvConfig& cfg);

struct Observation {
    double height = 1.0;     // pelvis_y / rest_height
    double vel_y = 0.0;      // m/s
    double vel_x = 0.0;      // m/s
    double vel_error = 0.0;  // target_velocity - vel_x

    std::array<double, kObsDim> as_array() const { return {height, vel_y, vel_x, vel_error}; }
};

struct StepResult {
    Observation obs;
    double reward = 0.0;
    bool done = false;
    bool fall = false;
};

// Complete copy of the mutable environment state, restorable bit-for-bit.
struct EnvSnapshot {
    double pelvis_y = 0.0;
    double vel_x = 0.0;
    double vel_y = 0.0;
    int step_index = 0;
    bool done = false;
    bool fall = false;
    std::mt19937_64 rng;
    std::uint64_t fingerprint = 0;

    friend bool operator==(const EnvSnapshot&, const EnvSnapshot&) = default;
};

// The reward: 9 - (v_star - v)^2, maximal (= 9) exactly at v = v_star.
double reward_fn(double v, double v_star);

// Point-mass pelvis on a muscle-engaged leg spring, driven horizontally by a
// fixed random mix of the drive excitations. Deterministic: a fixed
// (config, seed, action sequence) always reproduces the same trajectory.
class Environment {
public:
    explicit Environment(const EnvConfig& cfg);  // throws ConfigError

    Observation reset(std::uint64_t episode_seed);

    StepResult step(const MuscleAction& action);
    StepResult step(std::span<const double> action);  // validates length

    EnvSnapshot snapshot() const;
    void restore(const EnvSnapshot& snap);  // throws CompatibilityError

    Observation observe() const;
    bool done() const { return done_; }
    const EnvConfig& config() const { return cfg_; }
    std::uint64_t fingerprint() const { return fingerprint_; }
    const std::array<double, kDriveMuscles>& drive_weights() const { return mix_; }

    // Total step() calls over the instance lifetime, counterfactual branches
    // included. Not part of snapshots: restore() does not rewind it.
    long long lifetime_steps() const { return lifetime_steps_; }

private:
    EnvConfig cfg_;
    std::uint64_t fingerprint_;
    std::array<double, kDriveMuscles> mix_{};

    double pelvis_y_;
    double vel_x_;
    double vel_y_;
    int step_index_;
    bool done_;
    bool fall_;
    std::mt19937_64 rng_;
    long long lifetime_steps_ = 0;
};

// Hand-coded proportional controller; solvability oracle for the walking task.
// Engages full support and biases each drive muscle by the velocity error.
MuscleAction oracle_controller(const Observation& obs,
                               const std::array<double, kDriveMuscles>& drive_weights,
                               double gain = 0.5);

}  // namespace gait

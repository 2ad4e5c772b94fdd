#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <windctl/coordination.hpp>
#include <windctl/farm_model.hpp>
#include <windctl/rng.hpp>
#include <windctl/wake_sim.hpp>

namespace windctl {

/// Local arm of turbine w: one set-point level per member of scope(w), in
/// scope order. Arms of a turbine are numbered in lexicographic order of that
/// assignment.
struct LocalArm {
    std::size_t turbine = 0;
    std::vector<std::size_t> levels;

    friend auto operator<=>(const LocalArm &, const LocalArm &) = default;
};

/// Flat numbering of all local arms: turbine order, then lexicographic local
/// assignment.
class ArmIndex {
public:
    ArmIndex() = default;
    ArmIndex(const CoordinationGraph & graph, std::size_t menu_size);

    std::size_t turbines() const { return offset_.size() - 1; }
    std::size_t menu_size() const { return menu_; }
    std::size_t total() const { return offset_.back(); }
    std::size_t arms_of(std::size_t w) const { return offset_[w + 1] - offset_[w]; }
    std::size_t offset(std::size_t w) const { return offset_[w]; }
    const std::vector<std::size_t> & scope(std::size_t w) const { return scopes_[w]; }

    /// Global index of w's arm under a joint configuration.
    std::size_t arm_of(std::size_t w, const JointConfiguration & config) const;
    std::size_t encode(const LocalArm & arm) const;
    LocalArm decode(std::size_t global) const;
    /// Owning turbine of a global arm index.
    std::size_t turbine_of(std::size_t global) const;

    /// Level of scope member `member` (position in scope) in local arm `local`.
    std::size_t member_level(std::size_t w, std::size_t local, std::size_t member) const;

private:
    std::size_t menu_ = 0;
    std::vector<std::vector<std::size_t>> scopes_;
    std::vector<std::size_t> offset_{0};
};

struct Observation {
    std::size_t iteration = 0;
    std::size_t arm = 0;  // global arm index
    Watts power = 0.0;

    friend bool operator==(const Observation &, const Observation &) = default;
};

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;
};

/// Gaussian beliefs over the expected local power of every arm, with known
/// observation noise.
class BeliefState {
public:
    BeliefState(ArmIndex index, std::vector<Watts> prior_means, Watts prior_std, Watts noise_std);

    const ArmIndex & index() const { return index_; }
    Watts prior_std() const { return prior_std_; }
    Watts noise_std() const { return noise_std_; }
    Watts prior_mean(std::size_t arm) const { return prior_mean_[arm]; }
    std::size_t count(std::size_t arm) const { return count_[arm]; }
    double sum(std::size_t arm) const { return sum_[arm]; }
    const std::vector<Observation> & history() const { return history_; }

    Posterior posterior(std::size_t arm) const;

    /// One draw per arm from its posterior, in global arm order.
    std::vector<Watts> sample_all(Rng & rng) const;

    /// Records each turbine's achieved power against its local arm under
    /// `executed`. Throws std::invalid_argument when sizes disagree.
    void update(const JointConfiguration & executed, const FlowResult & flow, std::size_t iteration);
    /// Same, with per-turbine observed powers (e.g. with added noise).
    void update(const JointConfiguration & executed, const std::vector<Watts> & observed, std::size_t iteration);

    void observe(const Observation & obs);

    /// Fresh state with the same priors, rebuilt by replaying `history`.
    BeliefState replayed(const std::vector<Observation> & history) const;

private:
    ArmIndex index_;
    std::vector<Watts> prior_mean_;
    Watts prior_std_;
    Watts noise_std_;
    std::vector<std::size_t> count_;
    std::vector<double> sum_;
    std::vector<Observation> history_;
};

/// Prior mean of every arm is min(own set-point, available power at freestream
/// speed); parents do not enter the prior.
BeliefState init_beliefs(const FarmLayout & farm, const CoordinationGraph & graph, const SetPointMenu & menu,
                         const WindCondition & wind, Watts sigma = 1.0e6, Watts noise_std = 1.0e3);

/// iteration,turbine_id,local_arm,observed_power_w
std::string render_history(const FarmLayout & farm, const BeliefState & beliefs);

/// "T01=2 T07=0": scope member ids with their menu level indices.
std::string describe_arm(const FarmLayout & farm, const ArmIndex & index, std::size_t global);

} // namespace windctl

#include <windctl/bandit.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <windctl/table_io.hpp>

namespace windctl {

ArmIndex::ArmIndex(const CoordinationGraph & graph, std::size_t menu_size) : menu_(menu_size) {
    if (menu_size == 0) throw std::invalid_argument("menu must not be empty");
    scopes_.reserve(graph.size());
    offset_.reserve(graph.size() + 1);
    for (std::size_t w = 0; w < graph.size(); ++w) {
        scopes_.push_back(graph.scope(w));
        std::size_t arms = 1;
        for (std::size_t j = 0; j < scopes_.back().size(); ++j) {
            if (arms > (std::size_t{1} << 40) / menu_size)
                throw std::length_error("too many local arms for turbine " + std::to_string(w));
            arms *= menu_size;
        }
        offset_.push_back(offset_.back() + arms);
    }
}

std::size_t ArmIndex::arm_of(std::size_t w, const JointConfiguration & config) const {
    std::size_t local = 0;
    for (auto v : scopes_[w]) local = local * menu_ + config[v];
    return offset_[w] + local;
}

std::size_t ArmIndex::encode(const LocalArm & arm) const {
    const auto & s = scopes_.at(arm.turbine);
    if (arm.levels.size() != s.size())
        throw std::invalid_argument("local arm does not match the turbine's scope");
    std::size_t local = 0;
    for (auto l : arm.levels) {
        if (l >= menu_) throw std::invalid_argument("local arm level outside the menu");
        local = local * menu_ + l;
    }
    return offset_[arm.turbine] + local;
}

std::size_t ArmIndex::turbine_of(std::size_t global) const {
    if (global >= total()) throw std::out_of_range("arm index out of range");
    const auto it = std::upper_bound(offset_.begin(), offset_.end(), global);
    return static_cast<std::size_t>(it - offset_.begin()) - 1;
}

LocalArm ArmIndex::decode(std::size_t global) const {
    LocalArm arm;
    arm.turbine = turbine_of(global);
    std::size_t local = global - offset_[arm.turbine];
    arm.levels.assign(scopes_[arm.turbine].size(), 0);
    for (std::size_t j = arm.levels.size(); j-- > 0;) {
        arm.levels[j] = local % menu_;
        local /= menu_;
    }
    return arm;
}

std::size_t ArmIndex::member_level(std::size_t w, std::size_t local, std::size_t member) const {
    const std::size_t members = scopes_[w].size();
    for (std::size_t j = member + 1; j < members; ++j) local /= menu_;
    return local % menu_;
}

// ---------------------------------------------------------------------------

BeliefState::BeliefState(ArmIndex index, std::vector<Watts> prior_means, Watts prior_std, Watts noise_std) :
        index_(std::move(index)), prior_mean_(std::move(prior_means)), prior_std_(prior_std), noise_std_(noise_std),
        count_(index_.total(), 0), sum_(index_.total(), 0.0)
{
    if (!(prior_std > 0.0)) throw std::invalid_argument("prior standard deviation must be positive");
    if (!(noise_std >= 0.0)) throw std::invalid_argument("observation noise must be non-negative");
    if (prior_mean_.size() != index_.total()) throw std::invalid_argument("one prior mean per arm is required");
}

Posterior BeliefState::posterior(std::size_t arm) const {
    const std::size_t n = count_[arm];
    if (n == 0) return {prior_mean_[arm], prior_std_ * prior_std_};
    if (noise_std_ == 0.0) return {sum_[arm] / static_cast<double>(n), 0.0};
    const double prior_prec = 1.0 / (prior_std_ * prior_std_);
    const double noise_prec = 1.0 / (noise_std_ * noise_std_);
    const double var = 1.0 / (prior_prec + static_cast<double>(n) * noise_prec);
    return {var * (prior_mean_[arm] * prior_prec + sum_[arm] * noise_prec), var};
}

std::vector<Watts> BeliefState::sample_all(Rng & rng) const {
    std::vector<Watts> out(index_.total());
    for (std::size_t a = 0; a < out.size(); ++a) {
        const auto p = posterior(a);
        const double z = rng.normal();
        out[a] = p.variance > 0.0 ? p.mean + std::sqrt(p.variance) * z : p.mean;
    }
    return out;
}

void BeliefState::observe(const Observation & obs) {
    if (obs.arm >= index_.total()) throw std::out_of_range("observation refers to an unknown arm");
    ++count_[obs.arm];
    sum_[obs.arm] += obs.power;
    history_.push_back(obs);
}

void BeliefState::update(const JointConfiguration & executed, const std::vector<Watts> & observed, std::size_t iteration) {
    const std::size_t n = index_.turbines();
    if (executed.size() != n || observed.size() != n)
        throw std::invalid_argument("executed configuration and observations do not match the farm");
    for (std::size_t w = 0; w < n; ++w) {
        if (executed[w] >= index_.menu_size()) throw std::invalid_argument("executed configuration has an invalid level");
    }
    for (std::size_t w = 0; w < n; ++w) observe({iteration, index_.arm_of(w, executed), observed[w]});
}

void BeliefState::update(const JointConfiguration & executed, const FlowResult & flow, std::size_t iteration) {
    update(executed, flow.power, iteration);
}

BeliefState BeliefState::replayed(const std::vector<Observation> & history) const {
    BeliefState fresh(index_, prior_mean_, prior_std_, noise_std_);
    for (const auto & o : history) fresh.observe(o);
    return fresh;
}

BeliefState init_beliefs(const FarmLayout & farm, const CoordinationGraph & graph, const SetPointMenu & menu,
                         const WindCondition & wind, Watts sigma, Watts noise_std) {
    if (graph.size() != farm.size()) throw std::invalid_argument("graph does not match the farm");
    ArmIndex index(graph, menu.size());
    std::vector<Watts> means(index.total());
    for (std::size_t w = 0; w < farm.size(); ++w) {
        const Watts available = available_power(farm[w].spec, wind.speed);
        const auto & scope = graph.scope(w);
        const std::size_t self = static_cast<std::size_t>(std::find(scope.begin(), scope.end(), w) - scope.begin());
        for (std::size_t local = 0; local < index.arms_of(w); ++local) {
            const std::size_t level = index.member_level(w, local, self);
            means[index.offset(w) + local] = std::min(menu[level], available);
        }
    }
    return BeliefState(std::move(index), std::move(means), sigma, noise_std);
}

std::string describe_arm(const FarmLayout & farm, const ArmIndex & index, std::size_t global) {
    const auto arm = index.decode(global);
    std::string s;
    const auto & scope = index.scope(arm.turbine);
    for (std::size_t j = 0; j < scope.size(); ++j) {
        if (j) s += ' ';
        s += farm[scope[j]].id + "=" + std::to_string(arm.levels[j]);
    }
    return s;
}

std::string render_history(const FarmLayout & farm, const BeliefState & beliefs) {
    CsvWriter csv("windctl.history/1", {"iteration", "turbine_id", "local_arm", "observed_power_w"});
    for (const auto & o : beliefs.history()) {
        const std::size_t w = beliefs.index().turbine_of(o.arm);
        csv.cell(o.iteration).cell(farm[w].id).cell(describe_arm(farm, beliefs.index(), o.arm)).cell(o.power);
        csv.end_row();
    }
    return csv.str();
}

} // namespace windctl

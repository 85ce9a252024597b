#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "evtspd/charging.hpp"
#include "evtspd/network.hpp"
#include "evtspd/solution.hpp"

namespace evtspd {

struct VariantMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Variant { PL, PP };

struct LinTerm {
    int var;
    double coef;
};

enum class Sense { LE, GE, EQ };

struct ModelConstraint {
    std::string name;
    std::vector<LinTerm> terms;
    Sense sense;
    double rhs;
};

struct ModelVar {
    std::string name;
    double lb = 0.0, ub = 0.0;
    bool binary = false;
};

// Full three-index model: variables, named constraints, objective = arrival
// time at the route-end depot copy. Energies are battery fractions, times
// are seconds.
struct ModelSpec {
    Variant variant = Variant::PL;
    VariantFlags flags;
    bool range_flag = false;
    int segments = 1;
    double big_m_time = 0.0;

    std::vector<ModelVar> vars;
    std::unordered_map<std::string, int> var_index;
    std::vector<ModelConstraint> constraints;
    int objective_var = -1;

    int var(const std::string& name) const; // throws std::out_of_range
    int add_var(const std::string& name, double lb, double ub, bool binary);

    // variable/constraint counts keyed by name family (prefix before the
    // first index separator)
    nlohmann::json audit() const;
};

ModelSpec build_model(const AugmentedNetwork& net, const Instance& inst,
                      const ChargingModel& model, Variant variant,
                      const VariantFlags& flags = {});

// CPLEX-LP text, deterministic ordering
void write_lp(const ModelSpec& spec, const std::string& path);
std::string lp_text(const ModelSpec& spec);

using Assignment = std::map<std::string, double>;

Solution solution_from_assignment(const ModelSpec& spec, const AugmentedNetwork& net,
                                  const Assignment& values);

// Reference assignment for a feasible Solution, built from the evaluated
// timeline; used by the constraint-residual checks.
Assignment assignment_from_solution(const ModelSpec& spec, const Solution& sol,
                                    const AugmentedNetwork& net, const Instance& inst,
                                    const ChargingModel& model);

// largest constraint violation of the assignment (0 when all hold); name of
// the worst constraint is reported through worst if non-null
double max_residual(const ModelSpec& spec, const Assignment& values,
                    std::string* worst = nullptr);

} // namespace evtspd

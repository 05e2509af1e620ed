#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "diffstiff/analysis.hpp"
#include "diffstiff/errors.hpp"
#include "diffstiff/functions.hpp"
#include "diffstiff/optimize.hpp"
#include "diffstiff/parallel.hpp"

namespace diffstiff {

Problem assign_materials(const Problem& problem, std::span<const std::string> groups,
                         std::span<const std::size_t> materials) {
    if (groups.size() != materials.size()) {
        throw DimensionError("one material per group required");
    }
    Problem out = problem;
    std::vector<int> group_of(problem.model.elements().size(), -1);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto it = problem.groups.find(groups[g]);
        if (it == problem.groups.end()) throw ValidationError("unknown group '" + groups[g] + "'");
        if (materials[g] >= problem.model.materials().size()) {
            throw ValidationError("material index out of range");
        }
        out.model = out.model.with_material(it->second, materials[g]);
        for (std::size_t e : it->second) group_of[e] = static_cast<int>(g);
    }
    for (auto& v : out.variables) {
        const auto* a = std::get_if<AreaVariable>(&v.kind);
        if (!a || a->elements.empty()) continue;
        const int g = group_of[a->elements.front()];
        if (g < 0) continue;
        if (!std::all_of(a->elements.begin(), a->elements.end(), [&](std::size_t e) { return group_of[e] == g; })) {
            continue;
        }
        const auto& bounds = out.model.materials()[materials[static_cast<std::size_t>(g)]].area_bounds;
        if (!bounds) continue;
        v.lower = bounds->lower;
        v.initial = bounds->initial;
        v.upper = bounds->upper;
    }
    return out;
}

std::vector<SweepRun> material_sweep(const Problem& problem, const std::vector<std::string>& groups,
                                     const std::vector<std::string>& materials, int jobs,
                                     std::optional<OptimizerSettings> settings) {
    if (groups.empty() || materials.empty()) throw ValidationError("sweep needs groups and materials");
    std::vector<std::size_t> mat_index;
    for (const auto& name : materials) mat_index.push_back(problem.model.material_index(name));
    for (const auto& g : groups) {
        if (!problem.groups.contains(g)) throw ValidationError("unknown group '" + g + "'");
    }
    OptimizerSettings s = settings.value_or(problem.optimizer);
    s.algorithm = Algorithm::MMA;

    const std::size_t k = groups.size();
    std::size_t runs = 1;
    for (std::size_t i = 0; i < k; ++i) runs *= materials.size();

    std::vector<SweepRun> out(runs);
    parallel_for(runs, jobs, [&](std::size_t r) {
        SweepRun& run = out[r];
        // First group is the most significant digit.
        std::size_t code = r;
        run.assignment.assign(k, 0);
        for (std::size_t g = k; g-- > 0;) {
            run.assignment[g] = mat_index[code % materials.size()];
            code /= materials.size();
        }
        for (std::size_t g = 0; g < k; ++g) run.id += problem.model.materials()[run.assignment[g]].code;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        run.embodied_carbon = run.mass = run.volume = run.compliance = nan;
        try {
            const Problem p = assign_materials(problem, groups, run.assignment);
            run.result = optimize(p, s);
            const Model m = apply_variables(p, run.result.x_final);
            const AnalysisCache c = analyze(m);
            run.embodied_carbon = embodied_carbon(m);
            run.mass = mass(m);
            run.volume = volume(m);
            run.compliance = compliance(c.u, c.p);
        } catch (const std::exception& e) {
            run.error = e.what();
        }
    });
    std::stable_sort(out.begin(), out.end(), [](const SweepRun& a, const SweepRun& b) {
        const bool fa = a.error.empty() && std::isfinite(a.result.objective_final);
        const bool fb = b.error.empty() && std::isfinite(b.result.objective_final);
        if (fa != fb) return fa;
        return fa && a.result.objective_final < b.result.objective_final;
    });
    return out;
}

}  // namespace diffstiff

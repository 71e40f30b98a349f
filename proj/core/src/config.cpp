#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>
#include <utility>

#include <json.hpp>

#include "mgres/errors.hpp"
#include "mgres/experiment.hpp"

namespace mgres {

namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& items) {
    std::string out = "invalid configuration:";
    for (const auto& s : items) out += "\n  - " + s;
    return out;
}

// Collects type and key errors instead of stopping at the first one.
class Reader {
   public:
    explicit Reader(std::vector<std::string>& violations) : violations_(violations) {}

    bool object(const json& j, const std::string& path, const std::set<std::string>& allowed) {
        if (!j.is_object()) {
            violations_.push_back(path + " must be an object");
            return false;
        }
        for (const auto& [key, value] : j.items()) {
            if (allowed.count(key) == 0) violations_.push_back("unknown key '" + prefix(path) + key + "'");
        }
        return true;
    }

    template <typename T>
    void read(const json& parent, const std::string& path, const char* key, T& out) {
        const auto it = parent.find(key);
        if (it == parent.end()) return;
        const std::string name = prefix(path) + key;
        if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) return type_error(name, "a boolean");
            out = it->template get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_integer()) return type_error(name, "an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (it->is_number_unsigned() || it->template get<std::int64_t>() >= 0) {
                    out = it->template get<T>();
                } else {
                    violations_.push_back(name + " must be >= 0");
                }
            } else {
                out = it->template get<T>();
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!it->is_number()) return type_error(name, "a number");
            out = it->template get<T>();
        } else {
            if (!it->is_string()) return type_error(name, "a string");
            out = it->template get<std::string>();
        }
    }

    void type_error(const std::string& name, const char* what) { violations_.push_back(name + " must be " + what); }
    void add(std::string violation) { violations_.push_back(std::move(violation)); }

   private:
    static std::string prefix(const std::string& path) { return path.empty() ? std::string() : path + "."; }
    std::vector<std::string>& violations_;
};

ExperimentConfig from_json(const json& root, std::vector<std::string>& violations) {
    ExperimentConfig c;
    Reader in(violations);
    if (!in.object(root, "config",
                   {"grid", "partition", "solver", "scenario", "strategies", "eta_speedup", "output_dir", "seed",
                    "parallel"})) {
        return c;
    }

    if (const auto g = root.find("grid"); g != root.end() && in.object(*g, "grid", {"n0", "levels"})) {
        in.read(*g, "grid", "n0", c.coarse_cells);
        in.read(*g, "grid", "levels", c.finest_level);
    }

    if (const auto p = root.find("partition"); p != root.end()) {
        if (p->is_array() && p->size() == 3 && std::all_of(p->begin(), p->end(), [](const json& v) {
                return v.is_number_integer();
            })) {
            c.partition = {(*p)[0].get<int>(), (*p)[1].get<int>(), (*p)[2].get<int>()};
        } else {
            in.add("partition must be an array of three integers [Px, Py, Pz]");
        }
    }

    if (const auto s = root.find("solver");
        s != root.end() && in.object(*s, "solver",
                                     {"pre_smooth", "post_smooth", "cycle", "stop_tol", "max_cycles",
                                      "coarse_policy", "coarse_sweeps"})) {
        in.read(*s, "solver", "pre_smooth", c.solver.pre_smooth);
        in.read(*s, "solver", "post_smooth", c.solver.post_smooth);
        in.read(*s, "solver", "stop_tol", c.solver.stop_tol);
        in.read(*s, "solver", "max_cycles", c.solver.max_cycles);
        std::string cycle(to_string(c.solver.cycle));
        in.read(*s, "solver", "cycle", cycle);
        try {
            c.solver.cycle = parse_cycle_type(cycle);
        } catch (const ConfigError& e) {
            in.add(std::string("solver.cycle: ") + e.what());
        }
        std::string policy = c.solver.coarse.kind == CoarsePolicy::Kind::DenseDirect ? "direct" : "sweeps";
        in.read(*s, "solver", "coarse_policy", policy);
        int sweeps = 0;
        in.read(*s, "solver", "coarse_sweeps", sweeps);
        if (policy == "direct") {
            c.solver.coarse = CoarsePolicy::dense();
            if (s->contains("coarse_sweeps")) in.add("solver.coarse_sweeps requires coarse_policy \"sweeps\"");
        } else if (policy == "sweeps") {
            c.solver.coarse = CoarsePolicy::smoother(sweeps);
        } else {
            in.add("solver.coarse_policy must be \"direct\" or \"sweeps\"");
        }
    }

    if (const auto s = root.find("scenario");
        s != root.end() && in.object(*s, "scenario", {"fault_after", "victim"})) {
        if (const auto f = s->find("fault_after"); f != s->end()) {
            if (f->is_number_integer()) {
                c.fault_cycles = {f->get<int>()};
            } else if (f->is_array() &&
                       std::all_of(f->begin(), f->end(), [](const json& v) { return v.is_number_integer(); })) {
                c.fault_cycles = f->get<std::vector<int>>();
            } else {
                in.add("scenario.fault_after must be an integer or an array of integers");
            }
        }
        in.read(*s, "scenario", "victim", c.victim);
    }

    if (const auto s = root.find("strategies"); s != root.end()) {
        if (!s->is_array()) {
            in.add("strategies must be an array of strategy names");
        } else {
            for (std::size_t i = 0; i < s->size(); ++i) {
                const json& item = (*s)[i];
                if (!item.is_string()) {
                    in.add("strategies[" + std::to_string(i) + "] must be a string");
                    continue;
                }
                try {
                    c.strategies.push_back(parse_strategy(item.get<std::string>()));
                } catch (const ConfigError& e) {
                    in.add("strategies[" + std::to_string(i) + "]: " + e.what());
                }
            }
        }
    }

    in.read(root, "", "eta_speedup", c.eta_speedup);
    std::string dir = c.output_dir.string();
    in.read(root, "", "output_dir", dir);
    c.output_dir = dir;
    in.read(root, "", "seed", c.seed);
    in.read(root, "", "parallel", c.parallel);
    for (auto& s : c.strategies) s.eta_speedup = c.eta_speedup;
    return c;
}

}  // namespace

ConfigValidationError::ConfigValidationError(std::vector<std::string> violations)
    : ConfigError(join(violations)), violations_(std::move(violations)) {}

void ExperimentConfig::validate() const {
    std::vector<std::string> v;
    const auto check = [&v](auto&& fn) {
        try {
            fn();
        } catch (const ConfigError& e) {
            v.emplace_back(e.what());
        }
    };

    if (coarse_cells < 2) v.push_back("grid.n0 must be >= 2 (got " + std::to_string(coarse_cells) + ")");
    if (finest_level < 1) v.push_back("grid.levels must be >= 1 (got " + std::to_string(finest_level) + ")");
    if (coarse_cells >= 2 && finest_level >= 1) check([&] { (void)build_hierarchy(coarse_cells, finest_level); });

    const std::pair<const char*, int> counts[] = {{"Px", partition.x}, {"Py", partition.y}, {"Pz", partition.z}};
    const std::string triple = "(" + std::to_string(partition.x) + "," + std::to_string(partition.y) + "," +
                               std::to_string(partition.z) + ")";
    bool counts_ok = true;  // rank count is meaningful even when the grid does not split evenly
    for (const auto& [name, count] : counts) {
        if (count < 1) {
            v.push_back(std::string("partition ") + name + " must be >= 1 (got " + std::to_string(count) + ")");
            counts_ok = false;
        } else if (coarse_cells >= 1 && coarse_cells % count != 0) {
            v.push_back("n0=" + std::to_string(coarse_cells) + " is not divisible by " + name + "=" +
                        std::to_string(count) + " in partition " + triple);
        }
    }
    if (counts_ok && partition.total() < 2) v.push_back("partition " + triple + " has a single rank; no fault possible");
    if (counts_ok && (victim < 0 || victim >= partition.total())) {
        v.push_back("scenario.victim " + std::to_string(victim) + " outside [0, " + std::to_string(partition.total()) +
                    ")");
    }

    check([&] { solver.validate(); });
    if (fault_cycles.empty()) v.emplace_back("scenario.fault_after needs at least one fault cycle");
    for (std::size_t i = 0; i < fault_cycles.size(); ++i) {
        const int k = fault_cycles[i];
        if (k < 1) v.push_back("fault cycle " + std::to_string(k) + " must be >= 1");
        if (k >= solver.max_cycles) {
            v.push_back("fault cycle " + std::to_string(k) + " must be below solver.max_cycles=" +
                        std::to_string(solver.max_cycles));
        }
        if (i > 0 && k <= fault_cycles[i - 1]) v.emplace_back("scenario.fault_after must be strictly increasing");
    }

    if (!(eta_speedup >= 1.0)) v.push_back("eta_speedup must be >= 1");
    std::set<std::string> labels;
    for (const auto& s : strategies) {
        // A speedup inherited from the top level is already reported above.
        RecoveryStrategy own = s;
        if (own.eta_speedup == eta_speedup && !(eta_speedup >= 1.0)) own.eta_speedup = 1.0;
        try {
            own.validate();
        } catch (const ConfigError& e) {
            v.push_back("strategy " + s.label() + ": " + e.what());
        }
        if (s.kind == RecoveryKind::None) v.emplace_back("strategy none is always run; do not list it");
        if (!labels.insert(s.label()).second) v.push_back("strategy " + s.label() + " listed twice");
    }
    if (output_dir.empty()) v.emplace_back("output_dir must not be empty");

    if (!v.empty()) throw ConfigValidationError(std::move(v));
}

ExperimentConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigValidationError({std::string("malformed JSON: ") + e.what()});
    }
    std::vector<std::string> violations;
    ExperimentConfig config = from_json(root, violations);
    try {
        config.validate();
    } catch (const ConfigValidationError& e) {
        violations.insert(violations.end(), e.violations().begin(), e.violations().end());
    }
    if (!violations.empty()) throw ConfigValidationError(std::move(violations));
    return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigIoError("cannot read config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    if (in.bad()) throw ConfigIoError("error while reading " + path.string());
    return parse_config_text(text.str());
}

std::string serialize_config(const ExperimentConfig& c) {
    json root;
    root["grid"] = {{"n0", c.coarse_cells}, {"levels", c.finest_level}};
    root["partition"] = {c.partition.x, c.partition.y, c.partition.z};
    json solver = {{"pre_smooth", c.solver.pre_smooth},
                   {"post_smooth", c.solver.post_smooth},
                   {"cycle", std::string(to_string(c.solver.cycle))},
                   {"stop_tol", c.solver.stop_tol},
                   {"max_cycles", c.solver.max_cycles}};
    if (c.solver.coarse.kind == CoarsePolicy::Kind::DenseDirect) {
        solver["coarse_policy"] = "direct";
    } else {
        solver["coarse_policy"] = "sweeps";
        solver["coarse_sweeps"] = c.solver.coarse.sweeps;
    }
    root["solver"] = solver;
    root["scenario"] = {{"fault_after", c.fault_cycles}, {"victim", c.victim}};
    json strategies = json::array();
    for (const auto& s : c.strategies) strategies.push_back(s.label());
    root["strategies"] = strategies;
    root["eta_speedup"] = c.eta_speedup;
    root["output_dir"] = c.output_dir.string();
    root["seed"] = c.seed;
    root["parallel"] = c.parallel;
    return root.dump(2) + "\n";
}

}  // namespace mgres

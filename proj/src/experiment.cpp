#include "ballistic/experiment.hpp"

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace ballistic {

using nlohmann::json;

namespace {

// nlohmann writes NaN and infinities as null; keep that explicit.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

void reject_unknown(const json& j, const std::vector<std::string>& known, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown field '" + key + "' in " + where);
        }
    }
}

SolverConfig parse_solver(const json& j, SolverConfig s) {
    reject_unknown(j, {"mu_schedule", "max_iterations", "gradient_tolerance", "objective_tolerance", "backtracking",
                       "boundary_keep", "armijo", "method", "memory", "cg_max_iterations", "momentum", "seed"},
                   "solver");
    s.mu_schedule = get_or(j, "mu_schedule", s.mu_schedule);
    s.max_iterations = get_or(j, "max_iterations", s.max_iterations);
    s.gradient_tolerance = get_or(j, "gradient_tolerance", s.gradient_tolerance);
    s.objective_tolerance = get_or(j, "objective_tolerance", s.objective_tolerance);
    s.backtracking = get_or(j, "backtracking", s.backtracking);
    s.boundary_keep = get_or(j, "boundary_keep", s.boundary_keep);
    s.armijo = get_or(j, "armijo", s.armijo);
    s.memory = get_or(j, "memory", s.memory);
    s.cg_max_iterations = get_or(j, "cg_max_iterations", s.cg_max_iterations);
    s.momentum = get_or(j, "momentum", s.momentum);
    s.seed = get_or(j, "seed", s.seed);
    if (j.contains("method")) s.method = parse_ascent_method(get_or<std::string>(j, "method", ""));
    return s;
}

InitialData parse_initial(const json& j) {
    reject_unknown(j, {"preset", "amplitude", "magnetic_amplitude", "constant", "values", "fourier", "seed", "cutoff"},
                   "initial");
    InitialData s;
    if (j.contains("values")) {
        s.kind = "values";
        s.values = get_or(j, "values", s.values);
    } else if (j.contains("fourier")) {
        s.kind = "fourier";
        for (const auto& t : j.at("fourier")) {
            reject_unknown(t, {"component", "k", "cos", "sin"}, "fourier term");
            FourierTerm f;
            f.component = get_or(t, "component", 0);
            f.k = get_or(t, "k", std::vector<int>{});
            f.cos = get_or(t, "cos", 0.0);
            f.sin = get_or(t, "sin", 0.0);
            s.fourier.push_back(f);
        }
    } else {
        s.kind = get_or<std::string>(j, "preset", s.kind);
    }
    s.amplitude = get_or(j, "amplitude", s.amplitude);
    s.magnetic_amplitude = get_or(j, "magnetic_amplitude", s.magnetic_amplitude);
    s.constant = get_or(j, "constant", s.constant);
    s.seed = get_or(j, "seed", s.seed);
    s.cutoff = get_or(j, "cutoff", s.cutoff);
    return s;
}

json report_json(const SolveReport& r) {
    return {{"J_finite", r.J_finite},
            {"J", number(r.J_value)},
            {"K0", r.K0},
            {"T", r.T},
            {"T_K0", r.T * r.K0},
            {"gap_ratio", number(r.gap_ratio)},
            {"feasibility_margin", r.feasibility_margin},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"final_gradient_norm", r.final_gradient_norm},
            {"final_mu", r.final_mu},
            {"wall_time", r.wall_time},
            {"v0_projected", r.v0_projected},
            {"method", r.method}};
}

json reconstruction_json(const ReconstructionReport& r) {
    const DiscrepancyReport& d = r.discrepancy;
    json flags = {{"has_oracle", d.has_oracle},
                  {"i", d.has_oracle ? json(d.flag_i) : json(nullptr)},
                  {"ii", d.flag_ii},
                  {"iii", d.has_oracle ? json(d.flag_iii) : json(nullptr)},
                  {"measure_i", number(d.measure_i)},
                  {"measure_ii", number(d.measure_ii)},
                  {"measure_iii", number(d.measure_iii)},
                  {"threshold_i", d.threshold_i},
                  {"threshold_ii", d.threshold_ii},
                  {"threshold_iii", d.threshold_iii},
                  {"decisive_i", d.decisive_i},
                  {"decisive_ii", d.decisive_ii},
                  {"decisive_iii", d.decisive_iii},
                  {"oracle_window", d.oracle_horizon},
                  {"agree", d.agree}};
    json thresholds = {{"discretization_tolerance", r.thresholds.discretization_tolerance},
                       {"gap", r.thresholds.gap},
                       {"eigenvalue", r.thresholds.eigenvalue},
                       {"band", r.thresholds.band},
                       {"eigenvalue_band", r.thresholds.eigenvalue_band}};
    return {{"range_defect", r.range_defect},
            {"B_identity_defect", r.B_identity_defect},
            {"residual_r_norm", r.residual_r_norm},
            {"initial_defect", r.initial_defect},
            {"initial_defect_relative", r.initial_defect_relative},
            {"strong_residual", r.strong_residual},
            {"brenier_difference", r.brenier.relative_difference},
            {"brenier_admitted_fraction", r.brenier.admitted_fraction},
            {"discrepancy", flags},
            {"thresholds", thresholds}};
}

json outcome_json(const ExperimentConfig& cfg, const SolveOutcome& o) {
    json j = report_json(o.result.report);
    j["name"] = cfg.name;
    j["instance"] = cfg.instance;
    j["space"] = o.instance.space->describe();
    j["steps"] = cfg.steps;
    j["bound"] = {{"applies", o.bound_applies}, {"holds", o.bound_holds}};
    if (o.reconstruction) j["reconstruction"] = reconstruction_json(*o.reconstruction);
    if (o.oracle) j["oracle"] = {{"instance", o.oracle->instance}, {"K0", o.oracle->K0}, {"horizon", number(o.oracle->horizon)}};
    return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

std::filesystem::path prepare_output(const ExperimentConfig& cfg) {
    const std::filesystem::path dir(cfg.output);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string fmt(double x) {
    if (!std::isfinite(x)) return "nan";
    std::ostringstream s;
    s << std::setprecision(17) << x;
    return s.str();
}

void write_timeseries(const std::filesystem::path& path, const SolveOutcome& o) {
    const FieldSeries v = o.reconstruction ? o.reconstruction->v : generalized_solution(o.instance, o.grid, o.result.dual.E);
    const std::vector<double> margins = node_margins(o.result.dual.B);
    std::ostringstream s;
    s << "t,K,feasibility_margin,J_contribution\n";
    for (int k = 0; k < o.grid.steps(); ++k) {
        const double contrib = o.result.step_contributions.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                                   : o.result.step_contributions[static_cast<std::size_t>(k)];
        s << fmt(o.grid.node(k)) << ',' << fmt(energy(v[static_cast<std::size_t>(k)])) << ','
          << fmt(margins[static_cast<std::size_t>(k)]) << ',' << fmt(contrib) << '\n';
    }
    write_text(path, s.str());
}

}  // namespace

void ExperimentConfig::validate() const {
    const auto& names = instance_names();
    if (std::find(names.begin(), names.end(), instance) == names.end()) {
        throw ConfigError("unknown instance '" + instance + "'");
    }
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("T must be positive");
    if (steps < 2) throw ConfigError("steps must be at least 2");
    if (instance == "ode") {
        if (!grid.empty()) throw ConfigError("the ode instance lives on atoms, not on a grid");
    } else if (grid.empty()) {
        throw ConfigError("instance '" + instance + "' needs a grid");
    }
    for (double v : sweep_values) {
        if (!std::isfinite(v)) throw ConfigError("sweep values must be finite");
    }
    if (!sweep_parameter.empty() && sweep_parameter != "T" && sweep_parameter != "amplitude") {
        throw ConfigError("sweep parameter must be 'T' or 'amplitude'");
    }
    try {
        solver.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j, {"name", "instance", "grid", "atoms", "weights", "T", "steps", "initial", "solver", "diagnostics",
                       "sweep", "output", "seed"},
                   "config");
    ExperimentConfig c;
    c.name = get_or<std::string>(j, "name", "");
    if (!j.contains("instance")) throw ConfigError("missing field 'instance'");
    c.instance = get_or<std::string>(j, "instance", "");
    c.grid = get_or(j, "grid", c.grid);
    c.atoms = get_or(j, "atoms", c.atoms);
    c.weights = get_or(j, "weights", c.weights);
    c.T = get_or(j, "T", c.T);
    c.steps = get_or(j, "steps", c.steps);
    c.seed = get_or(j, "seed", c.seed);
    c.output = get_or(j, "output", c.output);
    if (j.contains("initial")) c.initial = parse_initial(j.at("initial"));
    c.solver.seed = c.seed;
    try {
        if (j.contains("solver")) c.solver = parse_solver(j.at("solver"), c.solver);
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    if (j.contains("diagnostics")) {
        const json& d = j.at("diagnostics");
        reject_unknown(d, {"reconstruct", "oracle", "dump_fields", "solve"}, "diagnostics");
        c.reconstruct = get_or(d, "reconstruct", c.reconstruct);
        c.use_oracle = get_or(d, "oracle", c.use_oracle);
        c.dump_fields = get_or(d, "dump_fields", c.dump_fields);
        c.consistency_solve = get_or(d, "solve", c.consistency_solve);
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        reject_unknown(s, {"parameter", "values"}, "sweep");
        c.sweep_parameter = get_or<std::string>(s, "parameter", "T");
        c.sweep_values = get_or(s, "values", c.sweep_values);
    }
    if (c.instance == "ode" && c.atoms == 0 && c.weights.empty()) c.atoms = c.initial.values.size();
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config '" + path + "'");
    std::stringstream s;
    s << f.rdbuf();
    return parse_config(s.str());
}

SpaceHandle build_space(const ExperimentConfig& cfg) {
    try {
        if (!cfg.grid.empty()) return DiscreteSpace::torus(cfg.grid);
        if (!cfg.weights.empty()) return DiscreteSpace::atoms(cfg.weights);
        if (cfg.atoms == 0) throw ConfigError("atom space needs 'atoms', 'weights' or initial 'values'");
        return DiscreteSpace::atoms(cfg.atoms);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

VectorFieldd build_initial(const OperatorInstance& inst, const InitialData& init) {
    const SpaceHandle& space = inst.space;
    // extended systems carry an auxiliary component fixed to 1
    const Eigen::Index base = inst.flags.extended_system ? inst.n - 1 : inst.n;
    VectorFieldd v(space, inst.n);
    if (inst.flags.extended_system) v.component(inst.n - 1).setOnes();
    const double A = init.amplitude;

    if (init.kind == "values") {
        if (static_cast<Eigen::Index>(init.values.size()) != space->points() * base) {
            throw ConfigError("initial values: expected one value per atom and component");
        }
        for (Eigen::Index p = 0; p < space->points(); ++p) {
            for (Eigen::Index c = 0; c < base; ++c) v.values()(p, c) = init.values[static_cast<std::size_t>(p * base + c)];
        }
        return v;
    }
    if (init.kind == "constant") {
        for (Eigen::Index c = 0; c < base; ++c) v.component(c).setConstant(init.constant);
        return v;
    }
    if (init.kind == "random") {
        const VectorFieldd r = random_smooth_field(space, base, init.seed, init.cutoff);
        v.values().leftCols(base) = A * r.values();
        return v;
    }
    if (!space->is_grid()) throw ConfigError("initial preset '" + init.kind + "' needs a grid");
    const Eigen::ArrayXd x = space->coordinate(0).array();
    if (init.kind == "sine") {
        v.component(0) = (A * x.sin()).matrix();
        return v;
    }
    if (init.kind == "taylor_green") {
        if (space->dim() != 2 || base < 2) throw ConfigError("taylor_green needs a 2D grid and a 2D velocity");
        const Eigen::ArrayXd y = space->coordinate(1).array();
        v.component(0) = (A * x.sin() * y.cos()).matrix();
        v.component(1) = (-A * x.cos() * y.sin()).matrix();
        if (base >= 4) {
            v.component(2) = (-init.magnetic_amplitude * y.sin()).matrix();
            v.component(3) = (init.magnetic_amplitude * x.sin()).matrix();
        }
        return v;
    }
    if (init.kind == "fourier") {
        for (const auto& t : init.fourier) {
            if (t.component < 0 || t.component >= base) throw ConfigError("fourier term: component out of range");
            if (static_cast<int>(t.k.size()) != space->dim()) throw ConfigError("fourier term: one wavenumber per axis");
            Eigen::ArrayXd phase = Eigen::ArrayXd::Zero(space->points());
            for (int a = 0; a < space->dim(); ++a) phase += t.k[static_cast<std::size_t>(a)] * space->coordinate(a).array();
            v.component(t.component) += (t.cos * phase.cos() + t.sin * phase.sin()).matrix();
        }
        return v;
    }
    throw ConfigError("unknown initial preset '" + init.kind + "'");
}

std::optional<StrongOracle> find_oracle(const ExperimentConfig& cfg, const OperatorInstance& inst,
                                        const VectorFieldd& v0) {
    const TimeGrid tg(cfg.T, cfg.steps);
    if (cfg.instance == "ode") {
        const Eigen::VectorXd vals = v0.component(0);
        if ((cfg.T * vals.array() + 2.0).minCoeff() <= 0.0) return std::nullopt;
        return ode_oracle(inst.space, vals, tg).oracle;
    }
    if (cfg.instance == "burgers1d") {
        const double shock = burgers_shock_time(v0);
        return burgers_characteristics_oracle(inst.space, v0, std::min(cfg.T, 0.95 * shock));
    }
    if (cfg.instance == "euler2d" && cfg.initial.kind == "taylor_green" && cfg.initial.amplitude == 1.0 &&
        inst.space->sizes()[0] >= 32 && inst.space->sizes()[1] >= 32) {
        return stationary_euler_oracle(inst.space);
    }
    if (cfg.instance == "kdv" && cfg.initial.kind == "constant") return constant_kdv_oracle(inst.space, cfg.initial.constant);
    return std::nullopt;
}

SolveOutcome solve_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    OperatorInstance inst = make_instance(cfg.instance, build_space(cfg));
    const TimeGrid tg(cfg.T, cfg.steps);
    VectorFieldd v0 = build_initial(inst, cfg.initial);
    SolveResult result = maximize(inst, tg, v0, cfg.solver);
    SolveOutcome o{std::move(inst), tg, std::move(v0), std::move(result), std::nullopt, std::nullopt, false, true};
    if (cfg.use_oracle) o.oracle = find_oracle(cfg, o.instance, o.v0);
    if (cfg.reconstruct) {
        o.reconstruction = reconstruct(o.instance, o.grid, o.result.dual.E, o.v0, o.result.report.J_value,
                                       o.result.report.K0, o.oracle ? &*o.oracle : nullptr);
    }
    const SolveReport& r = o.result.report;
    o.bound_applies = o.instance.flags.conservative;
    o.bound_holds = !(o.bound_applies && r.converged) || r.J_value <= r.T * r.K0 * (1.0 + 1e-6);
    return o;
}

ConsistencyOutcome consistency_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const OperatorInstance inst = make_instance(cfg.instance, build_space(cfg));
    const TimeGrid tg(cfg.T, cfg.steps);
    const VectorFieldd v0 = build_initial(inst, cfg.initial);
    const std::optional<StrongOracle> oracle = find_oracle(cfg, inst, v0);
    if (!oracle) throw ConfigError("consistency mode needs data with a known strong solution");
    if (cfg.T > oracle->horizon) {
        // checked before the pair so that the refusal carries the cone eigenvalue when possible
        consistency_pair(inst, tg, *oracle);
        throw OracleRefused("consistency: horizon exceeds the oracle validity horizon", oracle->horizon);
    }
    const ConsistencyPair cp = consistency_pair(inst, tg, *oracle);
    ConsistencyOutcome out;
    out.pair = evaluate_candidate(inst, tg, v0, cp.E);
    out.residual_r = residual_r(inst, tg, cp.E).norm;
    out.min_eigenvalue = cp.min_eigenvalue;
    for (std::size_t k = 0; k < cp.B.size(); ++k) out.B_match = std::max(out.B_match, norm(cp.B[k] - cp.B_analytic[k]));
    if (cfg.consistency_solve) out.solve = solve_experiment(cfg);
    return out;
}

VerifyOutcome verify_experiment(const ExperimentConfig& cfg, int trials) {
    cfg.validate();
    const OperatorInstance inst = make_instance(cfg.instance, build_space(cfg));
    VerifyOutcome out;
    const std::uint64_t s = cfg.seed;
    out.checks.push_back(check_adjoint(inst, trials, s + 1));
    out.checks.push_back(check_projector(inst, trials, s + 2));
    out.checks.push_back(check_conservativity(inst, trials, s + 3));
    out.checks.push_back(check_PL_identity(inst, PLIdentity::qI, trials, s + 4));
    out.checks.push_back(check_PL_identity(inst, PLIdentity::I, trials, s + 5));
    out.checks.push_back(trace_probe(inst, trials, s + 6));
    for (const auto& c : out.checks) out.passed = out.passed && c.passed();
    return out;
}

void write_fields(const std::string& path, const OperatorInstance& inst, const DualVariables& dual, const FieldSeries& v) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    auto put_u64 = [&f](std::uint64_t x) {
        char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((x >> (8 * i)) & 0xffu);
        f.write(bytes, 8);
    };
    auto put_f64 = [&](double d) { put_u64(std::bit_cast<std::uint64_t>(d)); };
    auto put_array = [&](const std::string& name, const std::vector<const Eigen::MatrixXd*>& frames) {
        put_u64(name.size());
        f.write(name.data(), static_cast<std::streamsize>(name.size()));
        const std::uint64_t rows = frames.empty() ? 0 : static_cast<std::uint64_t>(frames.front()->rows());
        const std::uint64_t cols = frames.empty() ? 0 : static_cast<std::uint64_t>(frames.front()->cols());
        put_u64(3);
        put_u64(frames.size());
        put_u64(rows);
        put_u64(cols);
        for (const auto* m : frames) {
            for (Eigen::Index r = 0; r < m->rows(); ++r) {
                for (Eigen::Index c = 0; c < m->cols(); ++c) put_f64((*m)(r, c));
            }
        }
    };
    f.write("BALLISTC", 8);
    put_u64(3);
    std::vector<const Eigen::MatrixXd*> frames;
    for (const auto& e : dual.E) frames.push_back(&e.values());
    put_array("E", frames);
    frames.clear();
    for (const auto& b : dual.B) frames.push_back(&b.values());
    put_array("B", frames);
    frames.clear();
    for (const auto& x : v) frames.push_back(&x.values());
    put_array("v", frames);
    (void)inst;
}

int run_solve(const ExperimentConfig& cfg, std::ostream& log) {
    const SolveOutcome o = solve_experiment(cfg);
    const auto dir = prepare_output(cfg);
    write_text(dir / "report.json", outcome_json(cfg, o).dump(2) + "\n");
    write_timeseries(dir / "timeseries.csv", o);
    if (cfg.dump_fields) {
        const FieldSeries v = o.reconstruction ? o.reconstruction->v : generalized_solution(o.instance, o.grid, o.result.dual.E);
        write_fields((dir / "fields.bin").string(), o.instance, o.result.dual, v);
    }
    const SolveReport& r = o.result.report;
    log << cfg.instance << ": J = " << fmt(r.J_value) << ", T K0 = " << fmt(r.T * r.K0) << ", gap ratio = "
        << fmt(r.gap_ratio) << ", converged = " << (r.converged ? "yes" : "no") << ", iterations = " << r.iterations
        << '\n';
    return r.converged ? 0 : 2;
}

int run_verify(const ExperimentConfig& cfg, std::ostream& log) {
    const VerifyOutcome v = verify_experiment(cfg);
    json checks = json::array();
    for (const auto& c : v.checks) {
        checks.push_back({{"check", c.check},
                          {"status", !c.applicable ? "not claimed" : (c.passed() ? "passed" : "failed")},
                          {"trials", c.trials},
                          {"max_defect", number(c.max_defect)},
                          {"tolerance", c.tolerance},
                          {"note", c.note}});
        log << c.check << ": " << (!c.applicable ? "not claimed" : (c.passed() ? "passed" : "failed")) << " ("
            << fmt(c.max_defect) << ")\n";
    }
    const auto dir = prepare_output(cfg);
    write_text(dir / "verify.json",
               json{{"instance", cfg.instance}, {"passed", v.passed}, {"checks", checks}}.dump(2) + "\n");
    return v.passed ? 0 : 2;
}

int run_sweep(const ExperimentConfig& cfg, std::ostream& log) {
    if (cfg.sweep_values.empty()) throw ConfigError("sweep needs a non-empty value list");
    const auto dir = prepare_output(cfg);
    std::ostringstream csv;
    csv << "value,T,J,T_K0,gap_ratio,converged,flag_i,flag_ii,flag_iii,flags_agree,initial_defect,"
           "initial_defect_relative,strong_residual,wall_time\n";
    bool all_converged = true;
    for (double value : cfg.sweep_values) {
        ExperimentConfig c = cfg;
        if (cfg.sweep_parameter == "amplitude") {
            c.initial.amplitude = value;
        } else {
            c.T = value;
        }
        c.reconstruct = true;
        const SolveOutcome o = solve_experiment(c);
        const SolveReport& r = o.result.report;
        const ReconstructionReport& rec = *o.reconstruction;
        const DiscrepancyReport& d = rec.discrepancy;
        auto flag = [&](bool f) { return d.has_oracle ? std::string(f ? "1" : "0") : std::string("na"); };
        csv << fmt(value) << ',' << fmt(r.T) << ',' << fmt(r.J_value) << ',' << fmt(r.T * r.K0) << ','
            << fmt(r.gap_ratio) << ',' << (r.converged ? 1 : 0) << ',' << flag(d.flag_i) << ',' << (d.flag_ii ? 1 : 0)
            << ',' << flag(d.flag_iii) << ',' << (d.agree ? 1 : 0) << ',' << fmt(rec.initial_defect) << ','
            << fmt(rec.initial_defect_relative) << ',' << fmt(rec.strong_residual) << ',' << fmt(r.wall_time) << '\n';
        log << cfg.sweep_parameter << " = " << fmt(value) << ": gap ratio " << fmt(r.gap_ratio)
            << (r.converged ? "" : " (not converged)") << '\n';
        all_converged = all_converged && r.converged;
    }
    write_text(dir / "summary.csv", csv.str());
    return all_converged ? 0 : 2;
}

int run_consistency(const ExperimentConfig& cfg, std::ostream& log) {
    const ConsistencyOutcome c = consistency_experiment(cfg);
    json j = {{"name", cfg.name},
              {"instance", cfg.instance},
              {"gap_ratio", number(c.pair.gap_ratio)},
              {"pair", report_json(c.pair)},
              {"residual_r", c.residual_r},
              {"min_eigenvalue", c.min_eigenvalue},
              {"B_match", c.B_match}};
    if (c.solve) j["solve"] = outcome_json(cfg, *c.solve);
    const auto dir = prepare_output(cfg);
    write_text(dir / "report.json", j.dump(2) + "\n");
    if (c.solve) write_timeseries(dir / "timeseries.csv", *c.solve);
    log << cfg.instance << ": consistency pair J = " << fmt(c.pair.J_value) << ", gap ratio " << fmt(c.pair.gap_ratio);
    if (c.solve) log << "; optimizer gap ratio " << fmt(c.solve->result.report.gap_ratio);
    log << '\n';
    const bool ok = c.pair.J_finite && (!c.solve || c.solve->result.report.converged);
    return ok ? 0 : 2;
}

int run_command(const std::string& command, const std::string& config_path,
                const std::optional<std::string>& output_override, std::ostream& log, std::ostream& err) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
        if (output_override) cfg.output = *output_override;
        if (command == "sweep" && cfg.sweep_values.empty()) throw ConfigError("sweep needs a non-empty value list");
        // build once up front so that data errors surface before any artifact is written
        const OperatorInstance inst = make_instance(cfg.instance, build_space(cfg));
        build_initial(inst, cfg.initial);
    } catch (const OracleRefused& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    try {
        if (command == "solve") return run_solve(cfg, log);
        if (command == "verify") return run_verify(cfg, log);
        if (command == "sweep") return run_sweep(cfg, log);
        if (command == "consistency") return run_consistency(cfg, log);
        err << "error: unknown command '" << command << "'\n";
        return 1;
    } catch (const OracleRefused& e) {
        err << "oracle refused: " << e.what() << " (measured " << e.measured() << ")\n";
        return 3;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace ballistic

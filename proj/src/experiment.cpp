#include "ammfee/experiment.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ammfee/errors.hpp"
#include "ammfee/figures.hpp"

namespace ammfee {

using nlohmann::json;

const char* to_string(Calibration c) {
    switch (c) {
        case Calibration::fair_split: return "fair-split";
        case Calibration::canonical: return "canonical";
        case Calibration::monopoly: return "monopoly";
    }
    return "?";
}

Calibration calibration_from_string(const std::string& name) {
    if (name == "fair-split") return Calibration::fair_split;
    if (name == "canonical") return Calibration::canonical;
    if (name == "monopoly") return Calibration::monopoly;
    throw ConfigError("unknown calibration '" + name + "' (fair-split, canonical, monopoly)");
}

namespace {

// Typed, path-aware access to one JSON object; remembers which keys were read
// so that leftovers can be reported as unknown fields.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const char* key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    double number(const char* key, double fallback) {
        if (!has(key)) return fallback;
        return as_number(j_.at(key), at(key));
    }
    int integer(const char* key, int fallback) {
        if (!has(key)) return fallback;
        return as_int(j_.at(key), at(key));
    }
    std::uint64_t uint64(const char* key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number_unsigned()) throw ConfigError(at(key) + ": expected a non-negative integer");
        return v.get<std::uint64_t>();
    }
    bool boolean(const char* key, bool fallback) {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError(at(key) + ": expected true or false");
        return v.get<bool>();
    }
    std::string string(const char* key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(at(key) + ": expected a string");
        return v.get<std::string>();
    }
    const json& raw(const char* key) {
        seen_.insert(key);
        return j_.at(key);
    }
    std::string at(const std::string& key) const { return path_ + "." + key; }

    void reject_unknown() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError(path_ + "." + it.key() + ": unknown field");
        }
    }

    static double as_number(const json& v, const std::string& where) {
        if (!v.is_number()) throw ConfigError(where + ": expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(where + ": must be finite");
        return d;
    }
    static int as_int(const json& v, const std::string& where) {
        if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
        return v.get<int>();
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<double> number_list(const json& v, const std::string& where) {
    if (v.is_number()) return {Fields::as_number(v, where)};
    if (!v.is_array()) throw ConfigError(where + ": expected a number or an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(Fields::as_number(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<std::vector<double>> matrix_or_scalar(const json& v, const std::string& where) {
    if (v.is_number()) return {{Fields::as_number(v, where)}};
    if (!v.is_array()) throw ConfigError(where + ": expected a number or a matrix");
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto w = where + "[" + std::to_string(i) + "]";
        if (!v[i].is_array()) throw ConfigError(w + ": expected an array of numbers");
        out.push_back(number_list(v[i], w));
    }
    return out;
}

void require(bool ok, const std::string& where, const std::string& what) {
    if (!ok) throw ConfigError(where + ": " + what);
}

void validate_config(const ExperimentConfig& c) {
    require(!c.name.empty(), "config.name", "must not be empty");
    require(c.players >= 1 && c.players <= 4, "config.players", "must be between 1 and 4");
    require(c.calibration != Calibration::monopoly || c.players == 1, "config.calibration",
            "monopoly calibration needs players = 1");
    require(c.k > 0.0, "config.k", "must be positive");
    require(c.lambda >= 0.0, "config.lambda", "must be non-negative");
    require(c.monopoly_depth_sq > 0.0, "config.monopoly_depth_sq", "must be positive");
    require(c.rate_step > 0.0, "config.rate_step", "must be positive");
    require(c.center_rate > 0.0, "config.center_rate", "must be positive");
    require(c.grid_halfwidth >= 0, "config.grid_halfwidth", "must be non-negative");
    require(c.horizon > 0.0, "config.horizon", "must be positive");
    require(c.time_steps >= 1, "config.time_steps", "must be at least 1");
    require(c.s0 > 0.0, "config.s0", "must be positive");
    require(c.sigma >= 0.0, "config.sigma", "must be non-negative");
    require(c.zeta >= 0.0, "config.zeta", "must be non-negative");
    require(c.n_paths >= 1, "config.n_paths", "must be at least 1");
    require(c.linear_window >= 1, "config.linear_window", "must be at least 1");
    require(!c.policies.empty(), "config.policies", "must list at least one policy kind");
    require(c.activity_paths >= 1, "config.activity_paths", "must be at least 1");
    require(c.surface_slice_stride >= 1, "config.surface_slice_stride", "must be at least 1");
    for (double l : c.activity_lambdas) require(l >= 0.0, "config.activity_lambdas", "entries must be non-negative");
    for (int p : c.activity_players) require(p >= 1 && p <= 4, "config.activity_players", "entries must be in 1..4");
    for (double t : c.snapshot_times) require(t >= 0.0 && t < c.horizon, "config.snapshot_times", "entries must lie in [0, T)");
    for (const auto& f : c.figures) {
        if (!is_figure_id(f)) {
            std::string ids;
            for (const auto& e : figure_catalog()) ids += (ids.empty() ? "" : ", ") + e.id;
            throw ConfigError("config.figures: unknown figure id '" + f + "' (valid: " + ids + ")");
        }
    }
    const auto& o = c.overrides;
    const auto m = static_cast<std::size_t>(c.players);
    const auto venue_vector = [&](const std::optional<std::vector<double>>& v, const char* where, bool positive) {
        if (!v) return;
        require(v->size() == 1 || v->size() == m, where, "needs one entry or one per venue");
        for (double x : *v) require(positive ? x > 0.0 : x >= 0.0, where, positive ? "entries must be positive" : "entries must be non-negative");
    };
    venue_vector(o.k0, "config.overrides.k0", true);
    venue_vector(o.lambda_buy, "config.overrides.lambda_buy", false);
    venue_vector(o.lambda_sell, "config.overrides.lambda_sell", false);
    if (o.k_cross) {
        const auto& kc = *o.k_cross;
        const bool scalar = kc.size() == 1 && kc[0].size() == 1;
        require(scalar || kc.size() == m, "config.overrides.k_cross", "needs a scalar or an M x M matrix");
        for (const auto& row : kc) {
            require(scalar || row.size() == m, "config.overrides.k_cross", "needs a scalar or an M x M matrix");
            for (double x : row) require(x >= 0.0, "config.overrides.k_cross", "entries must be non-negative");
        }
    }
    if (o.sigma) require(*o.sigma >= 0.0, "config.overrides.sigma", "must be non-negative");
    if (o.s0) require(*o.s0 > 0.0, "config.overrides.s0", "must be positive");
    if (o.horizon) require(*o.horizon > 0.0, "config.overrides.T", "must be positive");
    if (o.grid_halfwidth) require(*o.grid_halfwidth >= 0, "config.overrides.N", "must be non-negative");
    if (o.dt) require(*o.dt > 0.0, "config.overrides.dt", "must be positive");
    if (o.n_paths) require(*o.n_paths >= 1, "config.overrides.n_paths", "must be at least 1");
    (void)c.sim_time();
}

}  // namespace

TimeGrid ExperimentConfig::solver_time() const { return TimeGrid{overrides.horizon.value_or(horizon), time_steps}; }

TimeGrid ExperimentConfig::sim_time() const {
    const double t = overrides.horizon.value_or(horizon);
    if (!overrides.dt) return solver_time();
    const double steps = t / *overrides.dt;
    const double rounded = std::round(steps);
    if (rounded < 1.0 || std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps)) {
        throw ConfigError("config.overrides.dt: T / dt must be a whole number of steps");
    }
    return TimeGrid{t, static_cast<int>(rounded)};
}

ExperimentConfig parse_config(const json& j) {
    Fields f(j, "config");
    ExperimentConfig c;
    if (!f.has("schema_version")) throw ConfigError("config.schema_version: missing");
    const int version = f.integer("schema_version", 0);
    if (version != ExperimentConfig::kSchemaVersion) {
        throw ConfigError("config.schema_version: unsupported version " + std::to_string(version));
    }
    if (!f.has("name")) throw ConfigError("config.name: missing");
    c.name = f.string("name", c.name);
    c.players = f.integer("players", c.players);
    c.calibration = calibration_from_string(f.string("calibration", to_string(c.calibration)));
    c.k = f.number("k", c.k);
    c.lambda = f.number("lambda", c.lambda);
    c.monopoly_depth_sq = f.number("monopoly_depth_sq", c.monopoly_depth_sq);
    c.rate_step = f.number("rate_step", c.rate_step);
    c.center_rate = f.number("center_rate", c.center_rate);
    c.grid_halfwidth = f.integer("grid_halfwidth", c.grid_halfwidth);
    c.horizon = f.number("horizon", c.horizon);
    c.time_steps = f.integer("time_steps", c.time_steps);
    c.s0 = f.number("s0", c.s0);
    c.sigma = f.number("sigma", c.sigma);
    c.zeta = f.number("zeta", c.zeta);
    c.n_paths = f.integer("n_paths", c.n_paths);
    c.seed = f.uint64("seed", c.seed);
    c.linear_window = f.integer("linear_window", c.linear_window);
    {
        const auto mode = f.string("generator_mode", to_string(c.generator_mode));
        if (mode == "pde") c.generator_mode = GeneratorMode::pde;
        else if (mode == "strict_theorem") c.generator_mode = GeneratorMode::strict_theorem;
        else throw ConfigError("config.generator_mode: expected pde or strict_theorem");
    }
    if (f.has("policies")) {
        const auto& v = f.raw("policies");
        if (!v.is_array()) throw ConfigError("config.policies: expected an array of strings");
        c.policies.clear();
        for (const auto& p : v) {
            if (!p.is_string()) throw ConfigError("config.policies: expected an array of strings");
            try {
                c.policies.push_back(policy_kind_from_string(p.get<std::string>()));
            } catch (const ConfigError& e) {
                throw ConfigError(std::string("config.policies: ") + e.what());
            }
        }
    }
    c.monopoly_benchmark = f.boolean("monopoly_benchmark", c.monopoly_benchmark);
    if (f.has("figures")) {
        const auto& v = f.raw("figures");
        if (!v.is_array()) throw ConfigError("config.figures: expected an array of strings");
        for (const auto& s : v) {
            if (!s.is_string()) throw ConfigError("config.figures: expected an array of strings");
            c.figures.push_back(s.get<std::string>());
        }
    }
    if (f.has("activity_lambdas")) c.activity_lambdas = number_list(f.raw("activity_lambdas"), f.at("activity_lambdas"));
    if (f.has("activity_players")) {
        const auto& v = f.raw("activity_players");
        if (!v.is_array()) throw ConfigError("config.activity_players: expected an array of integers");
        c.activity_players.clear();
        for (const auto& p : v) c.activity_players.push_back(Fields::as_int(p, "config.activity_players"));
    }
    c.activity_paths = f.integer("activity_paths", c.activity_paths);
    if (f.has("snapshot_times")) c.snapshot_times = number_list(f.raw("snapshot_times"), f.at("snapshot_times"));
    c.surface_slice_stride = f.integer("surface_slice_stride", c.surface_slice_stride);

    if (f.has("overrides")) {
        Fields o(f.raw("overrides"), "config.overrides");
        auto& ov = c.overrides;
        if (o.has("k0")) ov.k0 = number_list(o.raw("k0"), o.at("k0"));
        if (o.has("k_cross")) ov.k_cross = matrix_or_scalar(o.raw("k_cross"), o.at("k_cross"));
        if (o.has("lambda")) {
            ov.lambda_buy = number_list(o.raw("lambda"), o.at("lambda"));
            ov.lambda_sell = ov.lambda_buy;
        }
        if (o.has("lambda_buy")) ov.lambda_buy = number_list(o.raw("lambda_buy"), o.at("lambda_buy"));
        if (o.has("lambda_sell")) ov.lambda_sell = number_list(o.raw("lambda_sell"), o.at("lambda_sell"));
        if (o.has("sigma")) ov.sigma = o.number("sigma", 0.0);
        if (o.has("s0")) ov.s0 = o.number("s0", 0.0);
        if (o.has("T")) ov.horizon = o.number("T", 0.0);
        if (o.has("N")) ov.grid_halfwidth = o.integer("N", 0);
        if (o.has("dt")) ov.dt = o.number("dt", 0.0);
        if (o.has("n_paths")) ov.n_paths = o.integer("n_paths", 0);
        if (o.has("seed")) ov.seed = o.uint64("seed", 0);
        o.reject_unknown();
    }
    f.reject_unknown();
    validate_config(c);
    return c;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
    }
    return parse_config(j);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

json to_json(const ExperimentConfig& c) {
    json j{{"schema_version", ExperimentConfig::kSchemaVersion},
           {"name", c.name},
           {"players", c.players},
           {"calibration", to_string(c.calibration)},
           {"k", c.k},
           {"lambda", c.lambda},
           {"monopoly_depth_sq", c.monopoly_depth_sq},
           {"rate_step", c.rate_step},
           {"center_rate", c.center_rate},
           {"grid_halfwidth", c.grid_halfwidth},
           {"horizon", c.horizon},
           {"time_steps", c.time_steps},
           {"s0", c.s0},
           {"sigma", c.sigma},
           {"zeta", c.zeta},
           {"n_paths", c.n_paths},
           {"seed", c.seed},
           {"linear_window", c.linear_window},
           {"generator_mode", to_string(c.generator_mode)},
           {"monopoly_benchmark", c.monopoly_benchmark},
           {"figures", c.figures},
           {"activity_lambdas", c.activity_lambdas},
           {"activity_players", c.activity_players},
           {"activity_paths", c.activity_paths},
           {"snapshot_times", c.snapshot_times},
           {"surface_slice_stride", c.surface_slice_stride}};
    json pol = json::array();
    for (auto p : c.policies) pol.push_back(to_string(p));
    j["policies"] = pol;
    json o = json::object();
    const auto& ov = c.overrides;
    if (ov.k0) o["k0"] = *ov.k0;
    if (ov.k_cross) o["k_cross"] = *ov.k_cross;
    if (ov.lambda_buy) o["lambda_buy"] = *ov.lambda_buy;
    if (ov.lambda_sell) o["lambda_sell"] = *ov.lambda_sell;
    if (ov.sigma) o["sigma"] = *ov.sigma;
    if (ov.s0) o["s0"] = *ov.s0;
    if (ov.horizon) o["T"] = *ov.horizon;
    if (ov.grid_halfwidth) o["N"] = *ov.grid_halfwidth;
    if (ov.dt) o["dt"] = *ov.dt;
    if (ov.n_paths) o["n_paths"] = *ov.n_paths;
    if (ov.seed) o["seed"] = *ov.seed;
    if (!o.empty()) j["overrides"] = o;
    return j;
}

std::string config_hash(const ExperimentConfig& cfg) { return hex64(fnv1a64(to_json(cfg).dump())); }

ExperimentConfig apply_options(ExperimentConfig cfg, const RunOptions& opts) {
    if (opts.paths) {
        if (*opts.paths < 1) throw ConfigError("--paths must be at least 1");
        cfg.overrides.n_paths = *opts.paths;
    }
    if (opts.seed) cfg.overrides.seed = *opts.seed;
    if (opts.dt) {
        if (!(*opts.dt > 0.0)) throw ConfigError("--dt must be positive");
        cfg.overrides.dt = *opts.dt;
    }
    (void)cfg.sim_time();
    return cfg;
}

Market build_market(const ExperimentConfig& cfg, int players, Calibration calibration) {
    if (calibration == Calibration::monopoly && players != 1) throw ConfigError("monopoly calibration needs one pool");
    const auto m = static_cast<std::size_t>(players);
    const double scale = static_cast<double>(players);
    PoolSpec spec;
    spec.depth_sq = cfg.monopoly_depth_sq / (scale * scale);
    spec.grid_halfwidth = cfg.overrides.grid_halfwidth.value_or(cfg.grid_halfwidth);
    spec.rate_step = cfg.rate_step;
    spec.center_rate = cfg.center_rate;
    double k0 = cfg.k, kc = cfg.k, lambda = cfg.lambda;
    if (calibration == Calibration::canonical) {
        spec.rate_step = cfg.rate_step * scale;
        k0 = kc = cfg.k / scale;
        lambda = cfg.lambda / scale;
    }

    Market market;
    try {
        for (std::size_t v = 0; v < m; ++v) market.grids.push_back(build_grid(spec));
    } catch (const GridError& e) {
        throw ConfigError(std::string("pool grid: ") + e.what());
    }
    market.flow = FlowParams::symmetric(players, lambda, k0, kc);
    market.flow.zeta = cfg.zeta;

    // Per-venue overrides only apply to the configured structure.
    if (players == cfg.players) {
        const auto& o = cfg.overrides;
        const auto spread = [&](const std::vector<double>& v, std::vector<double>& dst) {
            for (std::size_t i = 0; i < m; ++i) dst[i] = v.size() == 1 ? v[0] : v[i];
        };
        if (o.k0) spread(*o.k0, market.flow.k0);
        if (o.lambda_buy) spread(*o.lambda_buy, market.flow.lambda_buy);
        if (o.lambda_sell) spread(*o.lambda_sell, market.flow.lambda_sell);
        if (o.k_cross) {
            const auto& kcm = *o.k_cross;
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < m; ++j) {
                    market.flow.k_cross[i][j] = i == j ? 0.0 : (kcm.size() == 1 ? kcm[0][0] : kcm[i][j]);
                }
            }
        }
    }
    try {
        market.validate();
    } catch (const InputError& e) {
        throw ConfigError(std::string("market: ") + e.what());
    }
    return market;
}

Market build_market(const ExperimentConfig& cfg) { return build_market(cfg, cfg.players, cfg.calibration); }

SolverSettings solver_settings(const ExperimentConfig& cfg, int threads) {
    SolverSettings s;
    s.time = cfg.solver_time();
    s.oracle = cfg.overrides.s0.value_or(cfg.s0);
    s.mode = cfg.generator_mode;
    s.threads = threads;
    return s;
}

RunManifest make_manifest(const ExperimentConfig& cfg) {
    RunManifest m;
    m.experiment = cfg.name;
    m.config_hash = config_hash(cfg);
    const auto st = cfg.solver_time();
    const auto sim = cfg.sim_time();
    m.solver = json{{"time_grid", {{"horizon", st.horizon}, {"steps", st.steps}}},
                    {"expm", "scaling and squaring with Pade 3/5/7/9/13 on one step, backward recursion"},
                    {"generator_mode", to_string(cfg.generator_mode)}};
    m.seed = cfg.overrides.seed.value_or(cfg.seed);
    m.extra = json{{"calibration", to_string(cfg.calibration)},
                   {"lambda_mapping", "header lambda is each venue's intensity per side"},
                   {"fee_cash", "fee times fee-free pool rate times size"},
                   {"sim_time_grid", {{"horizon", sim.horizon}, {"steps", sim.steps}}},
                   {"event_scheme", "one Bernoulli draw per venue and side per step, pre-step state"},
                   {"strategic_protocol",
                    {{"snapshot_times", cfg.snapshot_times},
                     {"child_trades", "one grid step per child, as many children as venues"}}}};
    m.timestamp = now_utc_iso8601();
    return m;
}

std::vector<FeePolicy> make_policies(PolicyKind kind, const EquilibriumSolution& solution, const Market& market,
                                     int linear_window) {
    const auto eq = equilibrium_policies(solution, market);
    std::vector<FeePolicy> out;
    for (const auto& p : eq) {
        switch (kind) {
            case PolicyKind::equilibrium: out.push_back(p); break;
            case PolicyKind::linear: out.push_back(fit_linear_policy(p, linear_window)); break;
            case PolicyKind::constant: out.push_back(constant_policy(p)); break;
            case PolicyKind::zero:
                out.push_back(fixed_fee_policy(p.player(), p.time_grid(), p.own_halfwidth(), p.rival_halfwidths(), 0.0));
                break;
        }
    }
    return out;
}

SimConfig make_sim_config(const ExperimentConfig& cfg, const Market& market, std::vector<FeePolicy> policies,
                          int threads) {
    SimConfig s;
    s.time = cfg.sim_time();
    s.n_paths = cfg.overrides.n_paths.value_or(cfg.n_paths);
    s.seed = cfg.overrides.seed.value_or(cfg.seed);
    s.market = market;
    s.oracle.s0 = cfg.overrides.s0.value_or(cfg.s0);
    s.oracle.sigma = cfg.overrides.sigma.value_or(cfg.sigma);
    s.oracle.mode = s.oracle.sigma > 0.0 ? OracleMode::arithmetic_brownian : OracleMode::constant;
    s.policies = std::move(policies);
    s.threads = threads;
    return s;
}

std::string structure_name(int players) {
    switch (players) {
        case 1: return "monopoly";
        case 2: return "duopoly";
        default: return std::to_string(players) + "-player";
    }
}

std::string player_label(int players, int venue) {
    if (players == 1) return "Monopoly";
    if (players == 2) return venue == 0 ? "A" : "B";
    return std::to_string(venue + 1);
}

const char* table_type_label(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::equilibrium: return "Optimal";
        case PolicyKind::linear: return "Linear";
        case PolicyKind::constant: return "Constant";
        case PolicyKind::zero: return "Zero";
    }
    return "?";
}

const TableRow& TableResult::find(const std::string& structure, const std::string& player, PolicyKind kind) const {
    for (const auto& r : rows) {
        if (r.structure == structure && r.player == player && r.kind == kind) return r;
    }
    throw InputError("table has no row " + structure + "/" + player + "/" + table_type_label(kind));
}

bool TableResult::has(const std::string& structure, const std::string& player, PolicyKind kind) const {
    for (const auto& r : rows) {
        if (r.structure == structure && r.player == player && r.kind == kind) return true;
    }
    return false;
}

EquilibriumSolution solve_market(const Market& market, const SolverSettings& settings) {
    return market.players() == 2 ? solve_two_player(market, settings) : solve_equilibrium(market, settings);
}

namespace {

void table_rows(const ExperimentConfig& cfg, const Market& market, int threads, TableResult& out) {
    const int m = market.players();
    const auto solution = solve_market(market, solver_settings(cfg, threads));
    for (auto kind : cfg.policies) {
        auto sim = make_sim_config(cfg, market, make_policies(kind, solution, market, cfg.linear_window), threads);
        const auto batch = run_batch(sim);
        for (int v = 0; v < m; ++v) {
            const auto& a = batch.venues[static_cast<std::size_t>(v)];
            out.rows.push_back(TableRow{structure_name(m), player_label(m, v), kind, a.fees, a.n_sell, a.n_buy,
                                        a.volume, a.boundary_hits});
        }
        if (m > 1) {
            std::vector<double> buf(batch.paths.size());
            const auto total = [&](auto&& get) {
                for (std::size_t i = 0; i < buf.size(); ++i) {
                    double s = 0.0;
                    for (const auto& v : batch.paths[i].venues) s += get(v);
                    buf[i] = s;
                }
                return estimate(buf);
            };
            out.rows.push_back(TableRow{structure_name(m), "Total", kind, batch.total_fees,
                                        total([](const VenuePathStats& v) { return double(v.n_sell); }),
                                        total([](const VenuePathStats& v) { return double(v.n_buy); }),
                                        batch.total_volume,
                                        total([](const VenuePathStats& v) { return double(v.boundary_hits); })});
        }
    }
}

}  // namespace

TableResult run_table(const ExperimentConfig& cfg, int threads) {
    TableResult out;
    table_rows(cfg, build_market(cfg), threads, out);
    if (cfg.monopoly_benchmark && cfg.players > 1) {
        table_rows(cfg, build_market(cfg, 1, Calibration::monopoly), threads, out);
    }
    return out;
}

CsvTable table_csv(const TableResult& table) {
    CsvTable csv({"structure", "player", "type", "fees", "fees_se", "sell", "sell_se", "buy", "buy_se", "vol",
                  "vol_se", "boundary_hits", "boundary_hits_se"});
    for (const auto& r : table.rows) {
        csv.row({r.structure, r.player, table_type_label(r.kind), format_number(r.fees.mean), format_number(r.fees.se),
                 format_number(r.sell.mean), format_number(r.sell.se), format_number(r.buy.mean),
                 format_number(r.buy.se), format_number(r.vol.mean), format_number(r.vol.se),
                 format_number(r.boundary_hits.mean), format_number(r.boundary_hits.se)});
    }
    return csv;
}

std::vector<std::filesystem::path> write_surfaces(const ExperimentConfig& cfg, const EquilibriumSolution& solution,
                                                  const Market& market, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto manifest = make_manifest(cfg);
    const auto policies = equilibrium_policies(solution, market);
    const auto time = solution.settings.time;
    std::vector<int> slices;
    for (int k = 0; k <= time.steps; k += cfg.surface_slice_stride) slices.push_back(k);
    if (slices.back() != time.steps) slices.push_back(time.steps);

    std::vector<std::filesystem::path> written;
    json players = json::array();
    for (const auto& policy : policies) {
        const auto& surface = policy.surface();
        const int m = market.players();
        const auto label = player_label(m, policy.player());
        const auto file = out_dir / ("surface_" + label + ".csv");
        std::vector<std::string> columns{"t_index", "t", "own_index"};
        for (int r = 0; r < m; ++r) {
            if (r != policy.player()) columns.push_back("rival_index_" + player_label(m, r));
        }
        for (const char* c : {"log_w", "buy_fee", "sell_fee"}) columns.emplace_back(c);

        std::ofstream out(file, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + file.string());
        for (const auto& c : manifest.comment_lines()) out << "# " << c << '\n';
        for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
        out << '\n';
        const int n = policy.own_halfwidth();
        for (int k : slices) {
            const auto t = format_number(time.time(k));
            for (std::size_t tuple = 0; tuple < surface.tuple_count(); ++tuple) {
                const auto rivals = surface.tuple_state(tuple);
                std::string prefix;
                for (int r : rivals) prefix += "," + std::to_string(r);
                const auto lw = surface.family(tuple).log_w.at(k);
                for (int j = -n; j <= n; ++j) {
                    out << k << ',' << t << ',' << j << prefix << ',' << format_number(lw[static_cast<std::size_t>(j + n)])
                        << ',' << format_number(policy.buy_fee(k, j, rivals)) << ','
                        << format_number(policy.sell_fee(k, j, rivals)) << '\n';
                }
            }
        }
        written.push_back(file);
        const auto& grid = market.grids[static_cast<std::size_t>(policy.player())];
        json pj;
        to_json(pj["pool"], grid.spec());
        players.push_back(json{{"player", label},
                               {"file", file.filename().string()},
                               {"columns", columns},
                               {"k_total", surface.k_total()},
                               {"pool", pj["pool"]},
                               {"distinct_generators", surface.distinct_families()}});
    }
    json mj = manifest.to_json(true);
    mj["manifest_hash"] = manifest.hash();
    mj["surfaces"] = players;
    mj["slice_stride"] = cfg.surface_slice_stride;
    mj["slices"] = slices.size();
    mj["flow"] = market.flow;
    const auto mpath = out_dir / "surfaces.json";
    std::ofstream(mpath) << mj.dump(2) << '\n';
    written.push_back(mpath);
    return written;
}

std::vector<ActivityPoint> activity_scan(const ExperimentConfig& cfg, int threads) {
    std::vector<ActivityPoint> out;
    for (int players : cfg.activity_players) {
        for (double lambda : cfg.activity_lambdas) {
            ExperimentConfig c = cfg;
            c.lambda = lambda;
            const auto calibration = players == 1 ? Calibration::monopoly
                                     : cfg.calibration == Calibration::monopoly ? Calibration::fair_split
                                                                                : cfg.calibration;
            const auto market = build_market(c, players, calibration);
            const auto solution = solve_market(market, solver_settings(c, threads));
            auto sim = make_sim_config(c, market, make_policies(PolicyKind::equilibrium, solution, market, c.linear_window), threads);
            sim.n_paths = cfg.activity_paths;
            sim.snapshot_times = cfg.snapshot_times;
            const auto batch = run_batch(sim);

            ActivityPoint p;
            p.players = players;
            p.lambda = lambda;
            p.volume = batch.total_volume;
            {
                std::vector<double> hits(batch.paths.size());
                for (std::size_t i = 0; i < hits.size(); ++i) {
                    double s = 0.0;
                    for (const auto& v : batch.paths[i].venues) s += v.boundary_hits;
                    hits[i] = s / players;
                }
                p.boundary_hits = estimate(hits);
            }
            p.slippage = avg_slippage(batch);
            p.strategic = strategic_summary(batch, sim, players);
            p.revenue = revenue_row(batch, players, lambda);
            out.push_back(std::move(p));
        }
    }
    return out;
}

}  // namespace ammfee

#include "ammfee/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ammfee/errors.hpp"
#include "ammfee/experiment.hpp"
#include "ammfee/figures.hpp"

namespace ammfee {

bool CriterionResult::pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

namespace {

std::string fmt(const char* f, double a) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), f, a);
    return buf;
}

std::string num(double v) { return fmt("%.6g", v); }

Check within(const std::string& name, double value, double target, double rel) {
    const double dev = std::abs(value / target - 1.0);
    return Check{name, dev <= rel,
                 num(value) + " vs " + num(target) + " (" + fmt("%.2f", 100.0 * dev) + "%, tol " +
                     fmt("%.1f", 100.0 * rel) + "%)"};
}

Check in_range(const std::string& name, double value, double lo, double hi) {
    return Check{name, value >= lo && value <= hi, num(value) + " in [" + num(lo) + ", " + num(hi) + "]"};
}

class Stopwatch {
public:
    explicit Stopwatch(std::ostream* out) : out_(out), start_(std::chrono::steady_clock::now()) {}
    void note(const std::string& what) {
        if (!out_) return;
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        *out_ << "[" << fmt("%7.1f", s) << "s] " << what << std::endl;
    }

private:
    std::ostream* out_;
    std::chrono::steady_clock::time_point start_;
};

ExperimentConfig load(const AcceptanceOptions& o, const char* file) { return load_config(o.experiments_dir / file); }

const std::vector<std::pair<const char*, double>>& table1_targets() {
    static const std::vector<std::pair<const char*, double>> t{
        {"fees", 18.22}, {"sell", 36.79}, {"buy", 36.78}, {"vol", 1839.0}};
    return t;
}

double field(const TableRow& r, const std::string& f) {
    if (f == "fees") return r.fees.mean;
    if (f == "sell") return r.sell.mean;
    if (f == "buy") return r.buy.mean;
    return r.vol.mean;
}

void table1_checks(const TableResult& t, double tol, const std::string& tag, std::vector<Check>& out) {
    for (const char* p : {"A", "B"}) {
        const auto& row = t.find("duopoly", p, PolicyKind::equilibrium);
        for (const auto& [f, target] : table1_targets()) {
            out.push_back(within(tag + "duopoly " + p + " Optimal " + f, field(row, f), target, tol));
        }
    }
    const auto& mono = t.find("monopoly", "Monopoly", PolicyKind::equilibrium);
    out.push_back(within(tag + "monopoly Optimal fees", mono.fees.mean, 35.55, tol));
    out.push_back(within(tag + "monopoly Optimal vol", mono.vol.mean, 3590.0, tol));
}

Check deficit_check(const std::string& name, const TableResult& t) {
    const double opt = t.find("duopoly", "Total", PolicyKind::equilibrium).fees.mean;
    const double cst = t.find("duopoly", "Total", PolicyKind::constant).fees.mean;
    const double bps = (opt - cst) / opt * 1e4;
    return in_range(name + " Optimal over Constant, bps", bps, 30.0, 170.0);
}

void linear_checks(const std::string& name, const TableResult& t, std::vector<Check>& out) {
    for (const char* p : {"A", "B", "Total"}) {
        const double opt = t.find("duopoly", p, PolicyKind::equilibrium).fees.mean;
        const double lin = t.find("duopoly", p, PolicyKind::linear).fees.mean;
        out.push_back(within(name + " Linear vs Optimal fees, " + p, lin, opt, 0.005));
    }
}

std::vector<double> rk4_rhs(const GeneratorMatrix& g, const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<double> r(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 < n) r[i] += g.up[i] * v[i + 1];
        if (i > 0) r[i] += g.down[i] * v[i - 1];
    }
    return r;
}

// Solver properties on the lambda 50 duopoly.
CriterionResult solver_criterion(const AcceptanceOptions& o, Stopwatch& sw) {
    CriterionResult c{"solver", "Solver correctness (RK4, PDE residual order, terminal fee identity, M=2 bitwise)", {}};
    const auto cfg = load(o, "fees_duopoly.json");
    const auto market = build_market(cfg);
    auto settings = solver_settings(cfg, o.threads);
    const auto two = solve_two_player(market, settings);
    const auto general = solve_equilibrium(market, settings);
    sw.note("solver: solved base duopoly (lambda 50)");

    double rk4 = 0.0;
    const auto& s0 = *two.surfaces[0];
    for (std::size_t t = 0; t < s0.tuple_count(); ++t) {
        const auto& fam = s0.family(t);
        rk4 = std::max(rk4, rk4_deviation(fam.generator, fam.w, settings.time));
    }
    c.checks.push_back(Check{"expm path vs RK4, max relative error", rk4 <= 1e-8, num(rk4) + " <= 1e-08"});
    sw.note("solver: RK4 comparison done");

    std::vector<double> residual;
    for (int steps : {500, 1000, 2000}) {
        TimeGrid tg{settings.time.horizon, steps};
        double worst = 0.0;
        for (std::size_t t = 0; t < s0.tuple_count(); ++t) {
            const auto& g = s0.family(t).generator;
            worst = std::max(worst, hjb_residual(g, solve_w(g, tg), tg));
        }
        residual.push_back(worst);
    }
    const double order1 = std::log2(residual[0] / residual[1]);
    const double order2 = std::log2(residual[1] / residual[2]);
    c.checks.push_back(in_range("PDE residual order, M_t 500 -> 1000", order1, 1.8, 2.2));
    c.checks.push_back(in_range("PDE residual order, M_t 1000 -> 2000", order2, 1.8, 2.2));
    c.checks.back().detail += " (residuals " + num(residual[0]) + ", " + num(residual[1]) + ", " + num(residual[2]) + ")";
    sw.note("solver: residual convergence done");

    double worst_terminal = 0.0;
    const int last = settings.time.steps;
    for (int p = 0; p < 2; ++p) {
        const auto& s = *two.surfaces[static_cast<std::size_t>(p)];
        const auto& grid = market.grids[static_cast<std::size_t>(p)];
        const int n = grid.halfwidth();
        for (std::size_t t = 0; t < s.tuple_count(); ++t) {
            const auto rivals = s.tuple_state(t);
            for (int j = -n; j <= n; ++j) {
                if (const auto m = equilibrium_fee(s, grid, Side::buy, last, j, rivals)) {
                    worst_terminal = std::max(worst_terminal,
                                              std::abs(*m * s.k_total() * *grid.z_buy(j) * *grid.delta_buy(j) - 1.0));
                }
                if (const auto q = equilibrium_fee(s, grid, Side::sell, last, j, rivals)) {
                    worst_terminal = std::max(worst_terminal,
                                              std::abs(*q * s.k_total() * *grid.z_sell(j) * *grid.delta_sell(j) - 1.0));
                }
            }
        }
    }
    c.checks.push_back(Check{"terminal fee identity m* k Z Delta = 1", worst_terminal <= 1e-12,
                             num(worst_terminal) + " <= 1e-12"});

    bool bitwise = true;
    for (int p = 0; p < 2; ++p) {
        const auto& a = *two.surfaces[static_cast<std::size_t>(p)];
        const auto& b = *general.surfaces[static_cast<std::size_t>(p)];
        for (std::size_t t = 0; t < a.tuple_count() && bitwise; ++t) {
            const auto& fa = a.family(t);
            const auto& fb = b.family(t);
            bitwise = fa.w.data() == fb.w.data() && fa.log_w.data() == fb.log_w.data() &&
                      fa.generator.up == fb.generator.up && fa.generator.down == fb.generator.down;
        }
    }
    c.checks.push_back(Check{"M-player solver with M=2 equals two-player solver bitwise", bitwise,
                             bitwise ? "identical w, log w and generators" : "mismatch"});
    return c;
}

CriterionResult structural_criterion(const AcceptanceOptions& o, Stopwatch& sw) {
    CriterionResult c{"structure", "Structural fee properties at t=0.5 (crossing shift, oracle monotonicity)", {}};
    const auto cfg = load(o, "fees_duopoly.json");
    const auto market = build_market(cfg);
    const auto settings = solver_settings(cfg, o.threads);
    const auto sol = solve_two_player(market, settings);
    const auto policy = equilibrium_policy(sol.surfaces[0], market.grids[0]);
    const int k = settings.time.index_at(0.5);
    const auto& own = market.grids[0];
    const auto& rival = market.grids[1];
    const double s = settings.oracle;
    const double k0 = market.flow.k0[0];
    const double kc = market.flow.k_cross[0][1];

    const int l0[1] = {0};
    const int base = fee_crossing_index(policy, k, l0);
    // own index whose marginal rate equals the target, on the uniform Z grid
    const auto index_of_rate = [&](double z) { return (own.z(0) - z) / own.spec().rate_step; };
    c.checks.push_back(Check{"crossing within one step of Z^a = S when Z^b = S",
                             std::abs(base - index_of_rate(s)) <= 1.0 + 1e-9,
                             "crossing index " + std::to_string(base) + ", target " + num(index_of_rate(s))});
    for (double zb : {99.1, 101.1}) {
        int l = 0;
        for (int j = -rival.halfwidth(); j <= rival.halfwidth(); ++j) {
            if (std::abs(rival.z(j) - zb) < std::abs(rival.z(l) - zb)) l = j;
        }
        const int lv[1] = {l};
        const int cross = fee_crossing_index(policy, k, lv);
        const double target = (k0 * s + kc * rival.z(l)) / (k0 + kc);
        const double ti = index_of_rate(target);
        const bool direction = zb > s ? cross < base : cross > base;
        c.checks.push_back(Check{"crossing shift for Z^b = " + num(zb),
                                 std::abs(cross - ti) <= 1.0 + 1e-9 && direction,
                                 "crossing index " + std::to_string(cross) + " (Z^a " + num(own.z(cross)) +
                                     "), weighted-average target index " + num(ti) + " (rate " + num(target) +
                                     "), centre crossing " + std::to_string(base)});
    }
    sw.note("structure: crossings done");

    std::vector<FeePolicy> by_s;
    std::vector<EquilibriumSolution> keep;
    for (int sv = 95; sv <= 105; ++sv) {
        auto st = settings;
        st.oracle = sv;
        keep.push_back(solve_two_player(market, st));
        by_s.push_back(equilibrium_policy(keep.back().surfaces[0], own));
    }
    int buy_violations = 0, sell_violations = 0, states = 0;
    for (int l = -rival.halfwidth(); l <= rival.halfwidth(); ++l) {
        const int lv[1] = {l};
        for (int j = -own.halfwidth(); j <= own.halfwidth(); ++j) {
            ++states;
            for (std::size_t i = 1; i < by_s.size(); ++i) {
                const auto m0 = by_s[i - 1].buy_fee(k, j, lv), m1 = by_s[i].buy_fee(k, j, lv);
                const auto p0 = by_s[i - 1].sell_fee(k, j, lv), p1 = by_s[i].sell_fee(k, j, lv);
                if (m0 && *m1 < *m0) ++buy_violations;
                if (p0 && *p1 > *p0) ++sell_violations;
            }
        }
    }
    c.checks.push_back(Check{"m* nondecreasing in s over 95..105", buy_violations == 0,
                             std::to_string(buy_violations) + " violations over " + std::to_string(states) + " states"});
    c.checks.push_back(Check{"p* nonincreasing in s over 95..105", sell_violations == 0,
                             std::to_string(sell_violations) + " violations over " + std::to_string(states) + " states"});
    sw.note("structure: oracle scan done");
    return c;
}

double combined(double a, double b) { return std::sqrt(a * a + b * b); }

CriterionResult trends_criterion(const AcceptanceOptions& o, Stopwatch& sw) {
    CriterionResult c{"trends", "Figure-level trends over the activity scan", {}};
    auto cfg = load(o, "activity_scan.json");
    const auto scan = activity_scan(cfg, o.threads);
    sw.note("trends: activity scan done");

    const auto points = [&](int m) {
        std::vector<const ActivityPoint*> v;
        for (const auto& p : scan) {
            if (p.players == m) v.push_back(&p);
        }
        std::sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->volume.mean < b->volume.mean; });
        return v;
    };

    for (int m : cfg.activity_players) {
        const auto v = points(m);
        bool decreasing = true, concave = true;
        std::string detail = "slippage";
        for (const auto* p : v) detail += " " + fmt("%.5f", p->slippage.avg_slippage.mean);
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            const auto& a = v[i]->slippage.avg_slippage;
            const auto& b = v[i + 1]->slippage.avg_slippage;
            if (b.mean > a.mean + combined(a.se, b.se)) decreasing = false;
        }
        for (std::size_t i = 0; i + 2 < v.size(); ++i) {
            const double x0 = v[i]->volume.mean, x1 = v[i + 1]->volume.mean, x2 = v[i + 2]->volume.mean;
            const double c0 = 2.0 / ((x1 - x0) * (x2 - x0));
            const double c1 = -2.0 / ((x1 - x0) * (x2 - x1));
            const double c2 = 2.0 / ((x2 - x1) * (x2 - x0));
            const auto& s0 = v[i]->slippage.avg_slippage;
            const auto& s1 = v[i + 1]->slippage.avg_slippage;
            const auto& s2 = v[i + 2]->slippage.avg_slippage;
            const double d2 = c0 * s0.mean + c1 * s1.mean + c2 * s2.mean;
            const double se = std::sqrt(c0 * c0 * s0.se * s0.se + c1 * c1 * s1.se * s1.se + c2 * c2 * s2.se * s2.se);
            if (d2 > se) concave = false;
        }
        c.checks.push_back(Check{"slippage decreasing in volume, " + structure_name(m), decreasing, detail});
        c.checks.push_back(Check{"slippage concave in volume, " + structure_name(m), concave, detail});
    }

    const auto mono = points(1);
    const auto duo = points(2);
    {
        bool ok = !mono.empty() && mono.size() == duo.size();
        std::string detail;
        for (std::size_t i = 0; ok && i < mono.size(); ++i) {
            const auto& a = mono[i]->strategic.spread;
            const auto& b = duo[i]->strategic.spread;
            detail += (i ? "; " : "") + std::string("lambda ") + num(mono[i]->lambda) + ": " + fmt("%.4f", b.mean) +
                      " vs " + fmt("%.4f", a.mean);
            if (b.mean > a.mean + 3.0 * combined(a.se, b.se)) ok = false;
        }
        c.checks.push_back(Check{"duopoly strategic spread <= monopoly (3 SE slack)", ok, detail});
    }
    {
        bool ok = true;
        std::string detail;
        for (double lambda : cfg.activity_lambdas) {
            std::vector<double> per;
            for (int m : {1, 2, 3}) {
                for (const auto& p : scan) {
                    if (p.players == m && p.lambda == lambda) per.push_back(p.revenue.per_player.mean);
                }
            }
            if (per.size() != 3) {
                ok = false;
                continue;
            }
            ok = ok && per[0] > per[1] && per[1] > per[2];
            detail += (detail.empty() ? "" : "; ") + std::string("lambda ") + num(lambda) + ": " + fmt("%.3f", per[0]) +
                      " > " + fmt("%.3f", per[1]) + " > " + fmt("%.3f", per[2]);
        }
        c.checks.push_back(Check{"revenue per player monopoly > duopoly > 3-player", ok, detail});
    }
    {
        bool ok = true;
        std::string detail;
        for (double lambda : cfg.activity_lambdas) {
            const ActivityPoint* ref = nullptr;
            for (const auto& p : scan) {
                if (p.players == 1 && p.lambda == lambda) ref = &p;
            }
            if (!ref) {
                ok = false;
                continue;
            }
            for (const auto& p : scan) {
                if (p.lambda != lambda || p.players == 1) continue;
                const auto& a = ref->revenue.venue_revenue;
                const auto& b = p.revenue.venue_revenue;
                const double z = (b.mean - a.mean) / combined(a.se, b.se);
                if (std::abs(z) > 3.0) ok = false;
                detail += (detail.empty() ? "" : "; ") + std::string("lambda ") + num(lambda) + " M=" +
                          std::to_string(p.players) + ": " + fmt("%.4f", b.mean) + " vs " + fmt("%.4f", a.mean) +
                          " (" + fmt("%+.1f", z) + " SE, " + fmt("%+.2f", 100.0 * (b.mean / a.mean - 1.0)) + "%)";
            }
        }
        c.checks.push_back(Check{"venue 10% revenue equal across structures within 3 SE", ok, detail});
    }
    return c;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CriterionResult determinism_criterion(const AcceptanceOptions& o, Stopwatch& sw) {
    CriterionResult c{"determinism", "Byte-identical CSVs for the same seed at different thread counts", {}};
    auto table = load(o, "table1_k2.json");
    table.overrides.n_paths = 2000;
    auto scan = load(o, "activity_scan.json");
    scan.activity_paths = 400;
    scan.activity_lambdas = {50, 200};

    std::vector<std::vector<std::filesystem::path>> files;
    for (int threads : {1, 3}) {
        const auto dir = o.work_dir / ("threads" + std::to_string(threads));
        std::filesystem::create_directories(dir);
        const auto t = run_table(table, threads);
        const auto path = dir / "table.csv";
        table_csv(t).write_file(path, make_manifest(table).comment_lines());
        auto written = write_figures({"slippage-vs-volume", "bid-ask-vs-volume", "revenue-per-player"}, scan, threads,
                                     dir);
        written.insert(written.begin(), path);
        files.push_back(written);
    }
    sw.note("determinism: runs done");
    for (std::size_t i = 0; i < files[0].size(); ++i) {
        const bool same = read_file(files[0][i]) == read_file(files[1][i]);
        c.checks.push_back(Check{files[0][i].filename().string() + " identical for 1 and 3 threads", same,
                                 same ? "identical bytes" : "bytes differ"});
    }
    return c;
}

}  // namespace

double rk4_deviation(const GeneratorMatrix& generator, const WPath& w, const TimeGrid& time) {
    const auto n = static_cast<std::size_t>(generator.dim());
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm = std::max(norm, generator.up[i] + generator.down[i]);
    const double dt = time.dt();
    const int sub = std::max(1, static_cast<int>(std::ceil(dt * norm / 0.01)));
    const double h = dt / sub;
    std::vector<double> v(n, 1.0), tmp(n);
    double worst = 0.0;
    for (int k = time.steps - 1; k >= 0; --k) {
        for (int s = 0; s < sub; ++s) {
            const auto k1 = rk4_rhs(generator, v);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = v[i] + 0.5 * h * k1[i];
            const auto k2 = rk4_rhs(generator, tmp);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = v[i] + 0.5 * h * k2[i];
            const auto k3 = rk4_rhs(generator, tmp);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = v[i] + h * k3[i];
            const auto k4 = rk4_rhs(generator, tmp);
            for (std::size_t i = 0; i < n; ++i) v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        const auto ref = w.at(k);
        for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(ref[i] / v[i] - 1.0));
    }
    return worst;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& o) {
    Stopwatch sw(o.progress);
    std::vector<CriterionResult> out;

    auto t1cfg = load(o, "table1_k2.json");
    const auto t1 = run_table(t1cfg, o.threads);
    sw.note("table 1 done");
    {
        CriterionResult c{"table1", "Table 1 reproduction (k=2, lambda 100)", {}};
        table1_checks(t1, 0.02, "", c.checks);
        auto desk = t1cfg;
        desk.overrides.n_paths = 10000;
        desk.policies = {PolicyKind::equilibrium};
        const auto d = run_table(desk, o.threads);
        sw.note("table 1 desk-scale done");
        table1_checks(d, 0.05, "10k paths: ", c.checks);
        out.push_back(std::move(c));
    }

    const auto t2 = run_table(load(o, "table2_k1.json"), o.threads);
    sw.note("table 2 done");
    {
        CriterionResult c{"table2", "Table 2 reproduction (k=1) and 1/k scaling", {}};
        const double total2 = t2.find("duopoly", "Total", PolicyKind::equilibrium).fees.mean;
        const double total1 = t1.find("duopoly", "Total", PolicyKind::equilibrium).fees.mean;
        c.checks.push_back(within("duopoly total Optimal fees", total2, 72.37, 0.02));
        c.checks.push_back(in_range("Table 2 / Table 1 total fees", total2 / total1, 1.9, 2.1));
        out.push_back(std::move(c));
    }

    {
        auto cfg = load(o, "table3_3players_k2.json");
        cfg.policies = {PolicyKind::equilibrium};
        const auto t3 = run_table(cfg, o.threads);
        sw.note("table 3 done");
        CriterionResult c{"table3", "Table 3 reproduction (three players, k=2, lambda 100)", {}};
        c.checks.push_back(
            within("player 1 Optimal fees", t3.find("3-player", "1", PolicyKind::equilibrium).fees.mean, 12.25, 0.03));
        c.checks.push_back(
            within("total Optimal fees", t3.find("3-player", "Total", PolicyKind::equilibrium).fees.mean, 36.76, 0.03));
        out.push_back(std::move(c));
    }

    {
        CriterionResult c{"ordering", "Strategy ordering (Constant deficit, Linear matches Optimal)", {}};
        c.checks.push_back(deficit_check("Table 1", t1));
        c.checks.push_back(deficit_check("Table 2", t2));
        linear_checks("Table 1", t1, c.checks);
        linear_checks("Table 2", t2, c.checks);
        out.push_back(std::move(c));
    }

    out.push_back(solver_criterion(o, sw));
    out.push_back(structural_criterion(o, sw));
    out.push_back(trends_criterion(o, sw));
    out.push_back(determinism_criterion(o, sw));
    return out;
}

void print_acceptance(std::ostream& out, const std::vector<CriterionResult>& results) {
    int failed = 0;
    for (const auto& r : results) {
        out << (r.pass() ? "PASS " : "FAIL ") << r.id << ": " << r.title << '\n';
        for (const auto& c : r.checks) {
            out << "    " << (c.pass ? "ok   " : "FAIL ") << c.name << ": " << c.detail << '\n';
        }
        failed += !r.pass();
    }
    out << results.size() - static_cast<std::size_t>(failed) << "/" << results.size() << " criteria passed\n";
}

}  // namespace ammfee

#include "emcel/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "emcel/analysis.hpp"
#include "emcel/config.hpp"
#include "emcel/expression.hpp"
#include "emcel/scale.hpp"
#include "emcel/simulate.hpp"

#ifndef EMCEL_VERSION
#define EMCEL_VERSION "unknown"
#endif

namespace emcel {

namespace {

using nlohmann::json;

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

json num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

double parse_double(const std::string& key, const std::string& s) {
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s[0] == '+') ++first;
    const auto res = std::from_chars(first, s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw InputError(fmt::format("--{}: '{}' is not a decimal number", key, s));
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t at = s.find(sep, start);
        out.push_back(s.substr(start, at - start));
        if (at == std::string::npos) return out;
        start = at + 1;
    }
}

// Parameter access with defaults; resolved values go to the manifest.
class Params {
public:
    Params(const std::map<std::string, std::string>& given, std::set<std::string> allowed)
        : given_(given), allowed_(std::move(allowed)) {
        for (const auto& [k, v] : given_)
            if (!allowed_.count(k)) throw InputError(fmt::format("unknown option --{}", k));
    }

    bool has(const std::string& k) const { return given_.count(k) > 0; }

    double real(const std::string& k, double fallback) {
        const double v = has(k) ? parse_double(k, given_.at(k)) : fallback;
        resolved_[k] = num(v);
        return v;
    }
    double positive(const std::string& k, double fallback) {
        const double v = real(k, fallback);
        if (!(v > 0.0) || !std::isfinite(v)) throw InputError(fmt::format("--{} must be positive and finite", k));
        return v;
    }
    std::uint64_t count(const std::string& k, std::uint64_t fallback) {
        std::uint64_t v = fallback;
        if (has(k)) {
            const std::string& s = given_.at(k);
            const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
                throw InputError(fmt::format("--{}: '{}' is not a non-negative integer", k, s));
        }
        resolved_[k] = v;
        return v;
    }
    std::string text(const std::string& k, const std::string& fallback, std::set<std::string> choices = {}) {
        const std::string v = has(k) ? given_.at(k) : fallback;
        if (!choices.empty() && !choices.count(v)) {
            std::string list;
            for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
            throw InputError(fmt::format("--{} must be one of: {}", k, list));
        }
        resolved_[k] = v;
        return v;
    }
    /// lo:hi:step
    std::vector<double> grid(const std::string& k, const std::string& fallback) {
        const std::string s = text(k, fallback);
        const auto parts = split(s, ':');
        if (parts.size() != 3) throw InputError(fmt::format("--{} expects lo:hi:step, got '{}'", k, s));
        const double lo = parse_double(k, parts[0]);
        const double hi = parse_double(k, parts[1]);
        const double step = parse_double(k, parts[2]);
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi >= lo) || !(step > 0.0))
            throw InputError(fmt::format("--{}: need finite lo <= hi and step > 0", k));
        return make_grid(lo, hi, step);
    }
    /// lo:hi
    std::pair<double, double> range(const std::string& k, const std::string& fallback) {
        const std::string s = text(k, fallback);
        const auto parts = split(s, ':');
        if (parts.size() != 2) throw InputError(fmt::format("--{} expects lo:hi, got '{}'", k, s));
        const double lo = parse_double(k, parts[0]);
        const double hi = parse_double(k, parts[1]);
        if (!(hi > lo)) throw InputError(fmt::format("--{}: need lo < hi", k));
        return {lo, hi};
    }

    const json& resolved() const { return resolved_; }

private:
    const std::map<std::string, std::string>& given_;
    std::set<std::string> allowed_;
    json resolved_ = json::object();
};

class Job {
public:
    Job(const JobSpec& spec, std::ostream& log) : spec_(spec), log_(log) {
        std::error_code ec;
        std::filesystem::create_directories(spec.out_dir, ec);
        if (ec) throw InputError(fmt::format("cannot create output directory {}: {}", spec.out_dir.string(), ec.message()));
    }

    std::ofstream open(const std::string& name) {
        std::ofstream out(spec_.out_dir / name);
        if (!out) throw InputError(fmt::format("cannot write {}", (spec_.out_dir / name).string()));
        outputs_.push_back(name);
        return out;
    }

    void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << "\n"; }

    MeasureConfig load_config() {
        if (spec_.measure_config.empty()) throw InputError("this command needs a measure config (--config)");
        MeasureConfig cfg = load_measure_config(spec_.measure_config);
        for (const auto& w : cfg.warnings) {
            log_ << "warning: " << w << "\n";
            warnings_.push_back(w);
        }
        return cfg;
    }

    void manifest(const Params& p, const json& extra) {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
        json m = {{"tool", "emcel"},
                  {"version", EMCEL_VERSION},
                  {"command", spec_.command},
                  {"measure_config", spec_.measure_config.string()},
                  {"params", p.resolved()},
                  {"outputs", outputs_},
                  {"warnings", warnings_},
                  {"timestamp", stamp}};
        if (p.resolved().contains("seed")) m["seed"] = p.resolved()["seed"];
        for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
        std::ofstream out(spec_.out_dir / "manifest.json");
        out << m.dump(2) << "\n";
    }

    std::ostream& log() { return log_; }

private:
    const JobSpec& spec_;
    std::ostream& log_;
    std::vector<std::string> outputs_;
    std::vector<std::string> warnings_;
};

TableMode parse_mode(const std::string& s) { return s == "bisect-all" ? TableMode::bisect_all : TableMode::ode_hybrid; }

bool any_failed(const std::vector<PropertyReport>& rs) {
    for (const auto& r : rs)
        if (!r.passed && !r.inconclusive) return true;
    return false;
}

json reports_json(const std::vector<PropertyReport>& rs) {
    json a = json::array();
    for (const auto& r : rs) a.push_back(to_json(r));
    return a;
}

void log_reports(std::ostream& log, const std::vector<PropertyReport>& rs) {
    for (const auto& r : rs) {
        const char* status = r.inconclusive ? "INCONCLUSIVE" : (r.passed ? "pass" : "FAIL");
        log << fmt::format("{:<24} {:<12} worst {:.3e} (tol {:.1e}, {} checked, {} violations)\n", r.name, status,
                           r.worst_violation, r.tolerance, r.checked, r.violations);
    }
}

std::function<double(double)> eta_from_expression(std::string text) {
    static const std::set<std::string> bare = {"abs", "exp", "log", "sqrt", "cosh", "sinh", "tanh", "cos", "sin"};
    if (bare.count(text)) text += "(x)";
    auto e = std::make_shared<const Expression>(Expression::parse(text));
    return [e](double x) { return (*e)(x); };
}

// Default table window: the given range clipped to the closure of I.
std::pair<double, double> clip(const StateInterval& I, std::pair<double, double> w) {
    return {std::max(w.first, I.l), std::min(w.second, I.r)};
}

std::vector<double> default_grid(const StateInterval& I) {
    const double lo = std::isfinite(I.l) ? I.l : std::min(-2.0, I.r - 4.0);
    const double hi = std::isfinite(I.r) ? I.r : std::max(2.0, I.l + 4.0);
    return make_grid(lo, hi, (hi - lo) / 400.0);
}

PropertyReport containment_report(const SimResult& r, const std::string& name) {
    ReportBuilder rb(name, 0.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double bad = (r.paths[i].escaped || r.paths[i].exploded) ? 1.0 : 0.0;
        rb.add_lazy([&] { return fmt::format("path {}", i); }, bad, 0.0, bad);
    }
    return rb.finish();
}

json sim_summary(const SimResult& r) {
    std::size_t left = 0, right = 0, censored = 0, escaped = 0, exploded = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const auto& p = r.paths[i];
        if (p.absorbed_at) (p.absorbed_at->side == Side::left ? left : right)++;
        censored += r.exits[i].censored;
        escaped += p.escaped;
        exploded += p.exploded;
    }
    const auto v = terminal_values(r);
    const MeanEstimate e = mean_estimate(v);
    return {{"n_paths", r.size()},
            {"k_max", r.size() ? r.paths[0].k_max : 0},
            {"absorbed_left", left},
            {"absorbed_right", right},
            {"censored", censored},
            {"escaped", escaped},
            {"exploded", exploded},
            {"terminal_mean", num(e.mean)},
            {"terminal_ci95", num(e.half_width())}};
}

int cmd_scale_table(Job& job, const JobSpec& spec) {
    Params p(spec.params, {"h", "grid", "mode"});
    const MeasureConfig cfg = job.load_config();
    const double h = p.positive("h", 0.01);
    const auto grid = p.grid("grid", "-1:1:0.01");
    const TableMode mode = parse_mode(p.text("mode", "ode-hybrid", {"bisect-all", "ode-hybrid"}));
    const ScaleSolver solver(*cfg.measure, h);
    const ScaleTable t = scale_table(solver, grid, mode);
    auto out = job.open("scale_table.csv");
    write_csv(t, out);
    job.manifest(p, {{"l_h", num(solver.bounds().l_h)},
                     {"r_h", num(solver.bounds().r_h)},
                     {"reprojections", t.reprojections}});
    return kExitOk;
}

int cmd_simulate(Job& job, const JobSpec& spec) {
    Params p(spec.params, {"h", "T", "y0", "paths", "seed", "scheme", "record", "thin", "window", "nodes", "eta"});
    const MeasureConfig cfg = job.load_config();
    const StateInterval& I = cfg.measure->interval();
    SimConfig sc;
    sc.h = p.positive("h", 0.01);
    sc.T = p.positive("T", 1.0);
    sc.y0 = p.real("y0", probe_point(I));
    sc.n_paths = p.count("paths", 1000);
    sc.seed = p.count("seed", 0);
    sc.scheme = p.text("scheme", "emcel", {"emcel", "euler"}) == "euler" ? Scheme::euler : Scheme::emcel;
    sc.record = p.text("record", "full", {"full", "terminal"}) == "terminal" ? Record::terminal : Record::full;
    const std::uint64_t thin = p.count("thin", 1);
    if (!I.in_interior(sc.y0)) throw InputError("--y0 must lie inside the state space");

    SimResult r;
    std::vector<PropertyReport> reports;
    if (sc.scheme == Scheme::emcel) {
        const auto [lo, hi] = clip(I, p.range("window", fmt::format("{:.17g}:{:.17g}", sc.y0 - 10.0, sc.y0 + 10.0)));
        const std::uint64_t nodes = p.count("nodes", 8001);
        if (nodes < 2) throw InputError("--nodes must be at least 2");
        const TabulatedScale scale(ScaleSolver(*cfg.measure, sc.h), lo, hi, (hi - lo) / static_cast<double>(nodes - 1));
        r = simulate_chain(sc, scale);
        reports.push_back(containment_report(r, "containment"));
    } else {
        sc.eta = p.has("eta") ? eta_from_expression(p.text("eta", "")) : cfg.eta;
        if (!sc.eta) throw InputError("the Euler scheme needs --eta or a config whose pieces all give eta");
        r = simulate_euler(sc, I);
    }
    {
        auto out = job.open("paths.csv");
        write_paths_csv(r, out, thin);
    }
    {
        auto out = job.open("exits.csv");
        write_exits_csv(r, out);
    }
    job.write_json("summary.json", sim_summary(r));
    if (!reports.empty()) job.write_json("reports.json", reports_json(reports));
    log_reports(job.log(), reports);
    job.manifest(p, json::object());
    return any_failed(reports) ? kExitReportFailed : kExitOk;
}

int cmd_check(Job& job, const JobSpec& spec) {
    Params p(spec.params, {"suite", "h", "grid"});
    const MeasureConfig cfg = job.load_config();
    p.text("suite", "scale-properties", {"scale-properties", "section2"});
    const double h = p.positive("h", 0.01);
    std::vector<double> grid;
    if (p.has("grid")) {
        grid = p.grid("grid", "");
    } else {
        grid = default_grid(cfg.measure->interval());
    }
    const auto reports = scale_property_suite(*cfg.measure, h, grid);
    job.write_json("reports.json", reports_json(reports));
    log_reports(job.log(), reports);
    job.manifest(p, json::object());
    return any_failed(reports) ? kExitReportFailed : kExitOk;
}

int cmd_order(Job& job, const JobSpec& spec) {
    Params p(spec.params, {"y", "h-max", "h-min", "per-decade"});
    const MeasureConfig cfg = job.load_config();
    const double y = p.real("y", probe_point(cfg.measure->interval()));
    const double h_max = p.positive("h-max", 1e-2);
    const double h_min = p.positive("h-min", 1e-8);
    const auto per = p.count("per-decade", 1);
    if (per < 1 || per > 100) throw InputError("--per-decade must be between 1 and 100");
    const auto hs = decade_sequence(h_max, h_min, static_cast<int>(per));
    const OrderEstimate est = estimate_order(*cfg.measure, y, hs);
    job.write_json("order.json", {{"y", est.y},
                                  {"h_seq", est.h_seq},
                                  {"a_seq", est.a_seq},
                                  {"slope", est.slope},
                                  {"intercept_const", est.intercept_const},
                                  {"degenerate", est.degenerate}});
    job.log() << fmt::format("slope {:.6f}, constant {:.6f}{}\n", est.slope, est.intercept_const,
                             est.degenerate ? " (degenerate: all scale factors equal)" : "");
    job.manifest(p, json::object());
    return kExitOk;
}

int cmd_compare_euler(Job& job, const JobSpec& spec) {
    Params p(spec.params, {"eta", "h", "T", "paths", "seed", "y0", "window", "nodes"});
    if (!p.has("eta")) throw InputError("compare-euler needs --eta");
    const auto eta = eta_from_expression(p.text("eta", ""));
    std::shared_ptr<const SpeedMeasure> m;
    if (!spec.measure_config.empty()) {
        m = job.load_config().measure;
    } else {
        m = std::make_shared<const SpeedMeasure>(from_sde(eta, StateInterval::real_line()));
    }
    const StateInterval& I = m->interval();
    SimConfig sc;
    sc.h = p.positive("h", 0.01);
    sc.T = p.positive("T", 6.0);
    sc.y0 = p.real("y0", 0.0);
    sc.n_paths = p.count("paths", 100);
    sc.seed = p.count("seed", 7);
    sc.eta = eta;
    if (!I.in_interior(sc.y0)) throw InputError("--y0 must lie inside the state space");
    const auto [lo, hi] = clip(I, p.range("window", "-6:6"));
    const std::uint64_t nodes = p.count("nodes", 1201);
    if (nodes < 2) throw InputError("--nodes must be at least 2");

    const ScaleSolver solver(*m, sc.h);
    const TabulatedScale scale(solver, lo, hi, (hi - lo) / static_cast<double>(nodes - 1));
    const SimResult emcel = simulate_chain(sc, scale);
    SimConfig ec = sc;
    ec.scheme = Scheme::euler;
    const SimResult euler = simulate_euler(ec, I);

    {
        auto out = job.open("emcel_paths.csv");
        write_paths_csv(emcel, out);
    }
    {
        auto out = job.open("euler_paths.csv");
        write_paths_csv(euler, out);
    }
    {
        auto out = job.open("flags.csv");
        out << "path_id,euler_exploded,euler_escaped,emcel_exploded,emcel_escaped\n";
        for (std::size_t i = 0; i < sc.n_paths; ++i)
            out << fmt::format("{},{},{},{},{}\n", i, int(euler.paths[i].exploded), int(euler.paths[i].escaped),
                               int(emcel.paths[i].exploded), int(emcel.paths[i].escaped));
    }
    {
        auto out = job.open("scale_table.csv");
        write_csv(scale.table(), out);
    }
    std::vector<PropertyReport> reports;
    reports.push_back(containment_report(emcel, "emcel-containment"));
    reports.push_back(check_comparison(scale.table(), I, solver.bounds(), 2.0 * solver.eps_root()));
    job.write_json("reports.json", reports_json(reports));
    job.write_json("summary.json", {{"emcel", sim_summary(emcel)}, {"euler", sim_summary(euler)}});
    log_reports(job.log(), reports);
    std::size_t exploded = 0;
    for (const auto& path : euler.paths) exploded += path.exploded;
    job.log() << fmt::format("Euler paths exploded: {} of {}\n", exploded, sc.n_paths);
    job.manifest(p, json::object());
    return any_failed(reports) ? kExitReportFailed : kExitOk;
}

}  // namespace

int run(const JobSpec& spec, std::ostream& log) {
    try {
        Job job(spec, log);
        if (spec.command == "scale-table") return cmd_scale_table(job, spec);
        if (spec.command == "simulate") return cmd_simulate(job, spec);
        if (spec.command == "check") return cmd_check(job, spec);
        if (spec.command == "order") return cmd_order(job, spec);
        if (spec.command == "compare-euler") return cmd_compare_euler(job, spec);
        throw InputError(fmt::format("unknown command '{}'", spec.command));
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const ExpressionError& e) {
        log << "error: --eta: " << e.what() << "\n";
        return kExitInputError;
    } catch (const InputError& e) {
        log << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::invalid_argument& e) {
        log << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::domain_error& e) {
        log << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        log << "internal error: " << e.what() << "\n";
        return kExitInternalError;
    }
}

}  // namespace emcel

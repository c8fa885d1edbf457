#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "fch/bilayer_profile.hpp"
#include "fch/error.hpp"
#include "fch/micelle_profile.hpp"
#include "fch/sequence_lab.hpp"

namespace fch::cli {

using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A flag that overrides one key of the resolved config when given on the command line.
struct Binding {
    CLI::Option* opt = nullptr;
    std::vector<std::string> path;
    std::function<json()> value;
};

class Bindings {
public:
    explicit Bindings(CLI::App* app) : app_(app) {}

    template <class T>
    CLI::Option* add(const std::string& flag, std::vector<std::string> path, const std::string& help) {
        auto store = std::make_shared<T>();
        CLI::Option* opt = app_->add_option(flag, *store, help);
        items_.push_back({opt, std::move(path), [store] { return json(*store); }});
        keep_.push_back(store);
        return opt;
    }

    void apply(json& cfg) const {
        for (const auto& b : items_) {
            if (b.opt->count() == 0) continue;
            json* node = &cfg;
            for (std::size_t i = 0; i + 1 < b.path.size(); ++i) {
                if (!node->contains(b.path[i]) || !(*node)[b.path[i]].is_object()) (*node)[b.path[i]] = json::object();
                node = &(*node)[b.path[i]];
            }
            (*node)[b.path.back()] = b.value();
        }
    }

private:
    CLI::App* app_;
    std::vector<Binding> items_;
    std::vector<std::shared_ptr<void>> keep_;
};

struct Common {
    std::string config_path;
    std::string output;
    bool dry_run = false;
};

void add_common(CLI::App* sub, Common& c, const std::string& default_out) {
    c.output = default_out;
    sub->add_option("--config", c.config_path, "JSON config file; flags override its keys");
    sub->add_option("-o,--out", c.output, "Output file")->capture_default_str();
    sub->add_flag("--dry-run", c.dry_run, "Print the resolved config and exit");
}

void add_well_flags(Bindings& b) {
    b.add<double>("--r", {"well", "r"}, "Well exponent r in (1, 2)");
    b.add<double>("--u-plus", {"well", "u_plus"}, "Well minimum u+");
    b.add<double>("--tau", {"well", "tau"}, "Well depth parameter");
    b.add<double>("--p", {"well", "p"}, "Far-field growth exponent");
    b.add<double>("--c5", {"well", "c5"}, "Far-field coefficient");
}

void add_geometry_flags(Bindings& b) {
    b.add<std::string>("--shape", {"geometry", "shape"}, "circle | ellipse | sphere | torus");
    b.add<double>("--rho", {"geometry", "rho"}, "Circle or sphere radius");
    b.add<double>("--a", {"geometry", "a"}, "Ellipse semi-axis a");
    b.add<double>("--b", {"geometry", "b"}, "Ellipse semi-axis b");
    b.add<double>("--torus-R", {"geometry", "R"}, "Torus major radius");
    b.add<double>("--torus-r", {"geometry", "r"}, "Torus minor radius");
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw UsageError("config '" + path + "' must hold a JSON object");
    return j;
}

json resolve(json defaults, const Common& c, const Bindings& b) {
    defaults.merge_patch(load_config(c.config_path));
    b.apply(defaults);
    return defaults;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw UsageError("cannot write '" + path + "'");
    f.precision(17);
    return f;
}

void write_manifest(const std::string& output, const std::string& command, const json& config,
                    const std::vector<std::string>& files) {
    json m{{"tool", "fch"}, {"version", kVersion}, {"command", command}, {"config", config}, {"outputs", files}};
    std::ofstream f = open_out(output + ".manifest.json");
    f << m.dump(2) << '\n';
}

WellParams well_from(const json& cfg, int ambient_n) {
    const json w = cfg.value("well", json::object());
    const WellParams d = WellParams::defaults();
    WellParams probe;
    probe.r = w.value("r", d.r);
    probe.u_plus = w.value("u_plus", d.u_plus);
    probe.tau = w.value("tau", d.tau);
    if (probe.r > 1.0 && probe.u_plus > 0.0) peak_amplitude(probe);  // infeasible pulse before the c5 search
    WellParams p = w.get<WellParams>();
    p.validate(ambient_n);
    return p;
}

int cmd_profile(json cfg, const Common& c, std::ostream& out) {
    if (!cfg.contains("kind") || cfg["kind"].is_null()) throw UsageError("profile needs --kind bilayer|micelle");
    const std::string kind = cfg["kind"].get<std::string>();
    const int n = cfg.value("n", 2);
    const int samples = cfg.value("samples", 512);
    if (kind != "bilayer" && kind != "micelle") throw UsageError("unknown profile kind '" + kind + "'");
    if (n < 1 || n > 3) throw UsageError("--n must be 1, 2 or 3");
    if (samples < 8) throw UsageError("--samples must be at least 8");

    const WellParams params = well_from(cfg, std::max(n, 2));
    cfg["well"] = params;
    if (c.dry_run) {
        out << cfg.dump(2) << '\n';
        return kOk;
    }

    json summary;
    std::ofstream f = open_out(c.output);
    if (kind == "bilayer") {
        const BilayerProfile b = solve_profile(params, samples);
        write_profile_csv(f, b);
        summary = {{"kind", kind}, {"u_max", b.u_max}, {"L", b.half_width_L}, {"a_star", b.a_star}, {"b_star", b.b_star}};
    } else {
        MicelleOptions opts;
        opts.n_samples = std::max(samples, 101);
        const MicelleProfile m = shoot_micelle(n, params, opts);
        write_micelle_csv(f, m);
        summary = {{"kind", kind},          {"n", n},
                   {"amplitude", m.amplitude}, {"R0", m.r0_support},
                   {"sigma_n", m.sigma_n},  {"virial_defect", virial_defect(m, params)},
                   {"grazing_defect", m.grazing_defect}};
    }
    f.close();
    write_manifest(c.output, "profile", cfg, {c.output});
    out << summary.dump() << '\n';
    return kOk;
}

int cmd_converge(json cfg, const Common& c, const std::string& jsonl, std::ostream& out) {
    const SequenceSpec spec = cfg.get<SequenceSpec>();
    spec.params.validate(spec.geom->ambient_n());
    spec.validate();
    cfg = spec;
    if (c.dry_run) {
        out << cfg.dump(2) << '\n';
        return kOk;
    }

    const ConvergenceReport rep = run_convergence(spec);
    std::vector<std::string> files{c.output};
    {
        std::ofstream f = open_out(c.output);
        write_convergence_csv(f, rep);
    }
    if (!jsonl.empty()) {
        std::ofstream f = open_out(jsonl);
        write_convergence_jsonl(f, rep);
        files.push_back(jsonl);
    }
    write_manifest(c.output, "converge", cfg, files);

    const bool ok = convergence_accepted(rep);
    json summary{{"kind", to_string(rep.kind)},
                 {"predicted_limit", rep.predicted_limit},
                 {"last_energy", rep.energy_list.empty() ? 0.0 : rep.energy_list.back()},
                 {"accepted", ok}};
    summary["fitted_rate"] = rep.fitted_rate ? json(*rep.fitted_rate) : json();
    summary["extrapolated_limit"] = rep.extrapolated_limit ? json(*rep.extrapolated_limit) : json();
    if (rep.eps_list.size() >= 2) summary["norms"] = verify_norm_bounds(rep);
    out << summary.dump() << '\n';
    if (!ok) throw NumericalError("energies did not converge to the predicted limit at the expected rate");
    return kOk;
}

int cmd_phase(json cfg, const Common& c, std::ostream& out) {
    const auto geom = make_geometry(cfg.at("geometry"));
    const WellParams params = well_from(cfg, geom->ambient_n());
    cfg["well"] = params;
    const json& e1 = cfg.at("eta1");
    const json& e2 = cfg.at("eta2");
    const int n1 = e1.value("count", 0);
    const int n2 = e2.value("count", 0);
    if (n1 <= 0 || n2 <= 0) throw UsageError("phase grid is empty");
    const double alpha = cfg.value("alpha", 0.5);
    if (c.dry_run) {
        out << cfg.dump(2) << '\n';
        return kOk;
    }

    const auto etas = eta_grid(e1.value("min", 0.0), e1.value("max", 0.0), n1, e2.value("min", 0.0),
                               e2.value("max", 0.0), n2);
    const PhaseInputs in = phase_inputs(*geom, params);
    const auto cells = phase_diagram(*geom, alpha, in, etas);
    {
        std::ofstream f = open_out(c.output);
        write_phase_csv(f, cells);
    }
    write_manifest(c.output, "phase", cfg, {c.output});

    const auto counts = phase_sign_counts(cells);
    int valid = 0, bilayer_wins = 0, micelle_wins = 0;
    for (const auto& cell : cells) {
        if (!cell.valid) continue;
        ++valid;
        if (cell.winner == "bilayer") ++bilayer_wins;
        if (cell.winner == "micelle") ++micelle_wins;
    }
    json summary{{"cells", cells.size()},      {"valid", valid},
                 {"a_star", in.a_star},        {"b_star", in.b_star},
                 {"sigma_n", in.sigma_n},      {"bilayer_wins", bilayer_wins},
                 {"micelle_wins", micelle_wins},
                 {"signs", {{"++", counts[0]}, {"+-", counts[1]}, {"-+", counts[2]}, {"--", counts[3]}}}};
    out << summary.dump() << '\n';
    return kOk;
}

void report(std::ostream& err, const std::string& kind, const std::string& what, int code) {
    err << json{{"error", kind}, {"message", what}, {"exit_code", code}}.dump() << '\n';
}

}  // namespace

int exit_code_for(const std::string& kind) {
    if (kind == "numerical_error") return kNumerical;
    if (kind == "domain_error") return kUsage;
    return kInfeasible;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Functionalized Cahn-Hilliard profiles, energies and phase maps", "fch"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Common pc, cc, hc;
    std::string jsonl;

    CLI::App* prof = app.add_subcommand("profile", "Solve a bilayer or radial micelle profile");
    add_common(prof, pc, "profile.csv");
    Bindings pb(prof);
    pb.add<std::string>("--kind", {"kind"}, "bilayer | micelle");
    pb.add<int>("--n", {"n"}, "Ambient dimension of the micelle (1, 2, 3)");
    pb.add<int>("--samples", {"samples"}, "Number of samples");
    add_well_flags(pb);

    CLI::App* conv = app.add_subcommand("converge", "Energy of a sequence against its predicted limit");
    add_common(conv, cc, "converge.csv");
    conv->add_option("--jsonl", jsonl, "Also write one energy report per line");
    Bindings cb(conv);
    cb.add<std::string>("--kind", {"kind"}, "bilayer | micelle");
    cb.add<std::vector<double>>("--eps-list", {"eps_list"}, "Comma separated eps values")->delimiter(',');
    cb.add<double>("--alpha", {"alpha"}, "Micelle number density");
    cb.add<double>("--eta1", {"eta1"}, "Functionalization weight eta1");
    cb.add<double>("--eta2", {"eta2"}, "Functionalization weight eta2");
    cb.add<std::string>("--embedding", {"embedding"}, "translate | level_set");
    cb.add<double>("--translate-amplitude", {"translate", "amplitude"}, "Normal shift amplitude");
    cb.add<int>("--translate-mode", {"translate", "mode"}, "Normal shift mode");
    cb.add<double>("--modulation", {"modulation"}, "Tangential oscillation amplitude");
    cb.add<double>("--ell", {"ell"}, "Half-thickness of the tube in z");
    cb.add<int>("--nz", {"resolution", "nz"}, "Nodes in z");
    cb.add<int>("--ns", {"resolution", "ns"}, "Nodes per tangential axis");
    cb.add<double>("--dz", {"resolution", "dz"}, "Target z spacing");
    add_geometry_flags(cb);
    add_well_flags(cb);

    CLI::App* phase = app.add_subcommand("phase", "Bilayer against micelle limits over an (eta1, eta2) grid");
    add_common(phase, hc, "phase.csv");
    Bindings hb(phase);
    hb.add<double>("--alpha", {"alpha"}, "Micelle number density");
    hb.add<double>("--eta1-min", {"eta1", "min"}, "Lower eta1");
    hb.add<double>("--eta1-max", {"eta1", "max"}, "Upper eta1");
    hb.add<int>("--eta1-count", {"eta1", "count"}, "eta1 grid points");
    hb.add<double>("--eta2-min", {"eta2", "min"}, "Lower eta2");
    hb.add<double>("--eta2-max", {"eta2", "max"}, "Upper eta2");
    hb.add<int>("--eta2-count", {"eta2", "count"}, "eta2 grid points");
    add_geometry_flags(hb);
    add_well_flags(hb);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        report(err, "usage", e.what(), kUsage);
        return kUsage;
    }

    try {
        if (prof->parsed()) {
            json d{{"kind", nullptr}, {"n", 2}, {"samples", 512}, {"well", json::object()}};
            return cmd_profile(resolve(d, pc, pb), pc, out);
        }
        if (conv->parsed()) {
            json d = SequenceSpec{};
            d["geometry"] = {{"shape", "circle"}, {"rho", 1.0}};
            return cmd_converge(resolve(d, cc, cb), cc, jsonl, out);
        }
        json d{{"geometry", {{"shape", "sphere"}, {"rho", 3.0}}},
               {"alpha", 0.5},
               {"well", json::object()},
               {"eta1", {{"min", 0.1}, {"max", 2.0}, {"count", 21}}},
               {"eta2", {{"min", -2.0}, {"max", 6.0}, {"count", 21}}}};
        return cmd_phase(resolve(d, hc, hb), hc, out);
    } catch (const UsageError& e) {
        report(err, "usage", e.what(), kUsage);
        return kUsage;
    } catch (const Error& e) {
        const int code = exit_code_for(e.kind());
        report(err, e.kind(), e.what(), code);
        return code;
    } catch (const json::exception& e) {
        report(err, "usage", std::string("bad config value: ") + e.what(), kUsage);
        return kUsage;
    } catch (const std::exception& e) {
        report(err, "numerical_error", e.what(), kNumerical);
        return kNumerical;
    }
}

}  // namespace fch::cli

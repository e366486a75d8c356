#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "skinburst/acceptance.hpp"
#include "skinburst/config_io.hpp"
#include "skinburst/csv.hpp"
#include "skinburst/dynamics.hpp"
#include "skinburst/error.hpp"
#include "skinburst/parallel.hpp"
#include "skinburst/spectral.hpp"
#include "skinburst/transfer.hpp"

namespace skinburst::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::size_t kMaxSurvivalRows = 5000;

class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    void write(const std::string& name, const std::string& content) {
        std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorCode::Io, "cannot write " + (dir_ / name).string());
        f << content;
        if (!f) throw Error(ErrorCode::Io, "short write to " + (dir_ / name).string());
        files_.push_back({{"file", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
    }

    void finish(const std::string& command, const ordered_json& config, const ordered_json& arguments,
                double seconds) {
        ordered_json m;
        m["command"] = command;
        m["version"] = SKINBURST_VERSION_STRING;
        m["config"] = config;
        m["arguments"] = arguments;
        m["duration_seconds"] = seconds;
        m["outputs"] = files_;
        write_raw("manifest.json", m.dump(2) + "\n");
    }

    const fs::path& dir() const { return dir_; }

private:
    void write_raw(const std::string& name, const std::string& content) {
        std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorCode::Io, "cannot write " + (dir_ / name).string());
        f << content;
    }

    fs::path dir_;
    ordered_json files_ = ordered_json::array();
};

ordered_json config_json(const RunConfig& rc) {
    const LatticeConfig& c = rc.lattice;
    ordered_json j;
    j["lattice"] = {{"N", c.N}, {"J", c.J}, {"t", c.t}, {"gamma", c.gamma}, {"eta", c.eta},
                    {"impurities", c.impurities}};
    ordered_json d;
    if (rc.dynamics.n0) d["n0"] = *rc.dynamics.n0;
    d["dt"] = rc.dynamics.controls.dt;
    d["t_max"] = rc.dynamics.controls.t_max;
    d["eps_stop"] = rc.dynamics.controls.eps_stop;
    j["dynamics"] = d;
    ordered_json s = ordered_json::object();
    if (rc.scan.lneta_min) s["lneta_min"] = *rc.scan.lneta_min;
    if (rc.scan.lneta_max) s["lneta_max"] = *rc.scan.lneta_max;
    if (rc.scan.steps) s["steps"] = *rc.scan.steps;
    if (!rc.scan.sites.empty()) s["sites"] = rc.scan.sites;
    j["scan"] = s;
    j["text"] = format_config(rc);
    return j;
}

ordered_json args_json(const std::vector<std::string>& args) { return ordered_json(args); }

std::string real_or_nan(const std::optional<double>& v) {
    return v ? format_real(*v) : std::string("nan");
}

// --- spectrum -------------------------------------------------------------

struct SpectrumArgs {
    std::string config;
    std::string out = "out";
    std::string limit;
    bool classify = false;
};

std::string spectrum_csv(const SpectrumResult& r) {
    std::ostringstream os;
    CsvWriter w(os, "re_E,im_E,tag,r_mag,r_ph,lambda_analytic (lambda per unit cell)");
    for (std::size_t i = 0; i < r.size(); ++i) {
        const auto& res = r.closure_residual[i];
        w.cell(r.eigenvalues[i].real())
            .cell(r.eigenvalues[i].imag())
            .cell(std::string_view(to_string(r.classification[i])))
            .cell(res ? res->magnitude : std::numeric_limits<double>::quiet_NaN())
            .cell(res ? res->phase : std::numeric_limits<double>::quiet_NaN())
            .cell(r.lyapunov_analytic[i]);
        w.end_row();
    }
    return os.str();
}

LimitKind parse_limit(const std::string& s) {
    if (s == "eta_zero") return LimitKind::EtaZero;
    if (s == "eta_inf") return LimitKind::EtaInfinity;
    return LimitKind::Pbc;
}

int run_spectrum(const SpectrumArgs& a, const std::vector<std::string>& raw, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    const RunConfig rc = load_config(a.config);
    const LatticeConfig& c = rc.lattice;
    SpectrumResult r = diagonalize(build_hamiltonian(c, Basis::CrossStitch), false);
    if (a.classify) {
        classify_spectrum(r, c);
    } else {
        r.classification.assign(r.size(), SpectralTag::Unclassified);
        annotate_closure(r, c);
    }
    OutputSet files(a.out);
    files.write("spectrum.csv", spectrum_csv(r));
    out << "spectrum: " << r.size() << " eigenvalues";
    if (a.classify) {
        out << ", " << r.count(SpectralTag::LeftLoop) << " left loop, " << r.count(SpectralTag::RightLoop)
            << " right loop, " << r.count(SpectralTag::Detached) << " detached, gap " << imaginary_gap(r);
    }
    out << '\n';
    if (!a.limit.empty()) {
        const LimitKind kind = parse_limit(a.limit);
        std::ostringstream os;
        CsvWriter w(os, std::string("re_E,im_E,multiplicity (limit ") + to_string(kind) + ")");
        for (const LimitLevel& level : analytic_limit_spectrum(c, kind)) {
            w.cell(level.E.real()).cell(level.E.imag()).cell(level.multiplicity);
            w.end_row();
        }
        files.write("limit_spectrum.csv", os.str());
    }
    files.finish("spectrum", config_json(rc), args_json(raw),
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return kOk;
}

// --- eigenstates ----------------------------------------------------------

struct EigenstateArgs {
    std::string config;
    std::string out = "out";
    std::vector<std::string> select{"max_im", "min_im"};
    std::string loop = "right";
    std::string method = "vector";
};

StateSelector parse_selector(const std::string& s) {
    if (s == "max_im") return StateSelector::MaxImag;
    if (s == "min_im") return StateSelector::MinImag;
    if (s == "max_re") return StateSelector::MaxReal;
    return StateSelector::SmallestPositiveReal;
}

std::string profile_csv(const EigenstateProfile& p) {
    std::ostringstream os;
    CsvWriter w(os, "n,n_over_N,rho_n,abs_q,abs_p (E = " + format_real(p.E.real()) + " + " +
                        format_real(p.E.imag()) + "i; rho_n per unit cell, sums to 1)");
    for (int n = 1; n <= p.cells(); ++n) {
        w.cell(n).cell(p.coords[n - 1]).cell(p.density[n - 1]).cell(std::abs(p.q[n - 1])).cell(std::abs(p.p[n - 1]));
        w.end_row();
    }
    return os.str();
}

int run_eigenstates(const EigenstateArgs& a, const std::vector<std::string>& raw, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    const RunConfig rc = load_config(a.config);
    const LatticeConfig& c = rc.lattice;
    SpectrumResult r = diagonalize(build_hamiltonian(c, Basis::CrossStitch), true);
    classify_spectrum(r, c);
    const SpectralTag loop = a.loop == "left" ? SpectralTag::LeftLoop : SpectralTag::RightLoop;
    auto profile_at = [&](std::size_t i) {
        if (a.method == "recursion") return reconstruct_eigenstate(r.eigenvalues[i], c);
        return profile_from_vector(r.eigenvalues[i], r.right_eigenvectors->col(static_cast<Eigen::Index>(i)),
                                   Basis::CrossStitch, c);
    };

    OutputSet files(a.out);
    std::ostringstream table;
    CsvWriter w(table, "re_E,im_E,lambda_analytic,lambda_fit,stderr (per unit cell; loop states only)");
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r.classification[i] != SpectralTag::LeftLoop && r.classification[i] != SpectralTag::RightLoop) continue;
        const EigenstateProfile p = profile_at(i);
        w.cell(r.eigenvalues[i].real())
            .cell(r.eigenvalues[i].imag())
            .cell(r.lyapunov_analytic[i])
            .cell(p.fit ? p.fit->lambda : std::numeric_limits<double>::quiet_NaN())
            .cell(p.fit ? p.fit->std_error : std::numeric_limits<double>::quiet_NaN());
        w.end_row();
    }
    files.write("lyapunov.csv", table.str());
    for (const std::string& sel : a.select) {
        const auto idx = select_state(r, loop, parse_selector(sel));
        if (!idx) throw Error(ErrorCode::NotAnEigenvalue, "no " + a.loop + "-loop state for selector " + sel);
        const EigenstateProfile p = profile_at(*idx);
        files.write("profile_" + sel + ".csv", profile_csv(p));
        out << "eigenstate " << sel << ": E = " << format_real(p.E.real()) << " + " << format_real(p.E.imag())
            << "i, lambda_fit = " << real_or_nan(p.fit ? std::optional(p.fit->lambda) : std::nullopt) << '\n';
    }
    files.finish("eigenstates", config_json(rc), args_json(raw),
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return kOk;
}

// --- dynamics -------------------------------------------------------------

struct DynamicsArgs {
    std::string config;
    std::string out = "out";
    std::optional<int> n0;
    std::string scan;
    std::vector<int> sites;
    double drop_fraction = 0.5;
    unsigned threads = 0;
    std::optional<double> dt;
    std::optional<double> t_max;
    std::optional<double> eps_stop;
};

struct ScanSpec {
    double lo = -3.0;
    double hi = 3.0;
    int steps = 61;
};

ScanSpec parse_scan(const std::string& text, const ScanSettings& defaults) {
    ScanSpec s;
    if (defaults.lneta_min) s.lo = *defaults.lneta_min;
    if (defaults.lneta_max) s.hi = *defaults.lneta_max;
    if (defaults.steps) s.steps = *defaults.steps;
    if (text.empty() || text == "config") return s;
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.size() != 3) throw Error(ErrorCode::Usage, "--scan expects lneta_min:lneta_max:steps");
    try {
        std::size_t used = 0;
        s.lo = std::stod(parts[0], &used);
        if (used != parts[0].size()) throw std::invalid_argument("lo");
        s.hi = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument("hi");
        s.steps = std::stoi(parts[2], &used);
        if (used != parts[2].size()) throw std::invalid_argument("steps");
    } catch (const std::logic_error&) {
        throw Error(ErrorCode::Usage, "cannot parse --scan value '" + text + "'");
    }
    if (s.steps < 2 || !(s.hi > s.lo)) throw Error(ErrorCode::Usage, "--scan needs lneta_max > lneta_min and steps >= 2");
    return s;
}

std::string dissipation_plot(const LatticeConfig& c, int n0) {
    std::ostringstream os;
    os << "# Site-resolved dissipation probability\n"
       << "set datafile separator ','\n"
       << "set terminal pngcairo size 900,500\n"
       << "set output 'dissipation.png'\n"
       << "set xlabel 'unit cell n'\n"
       << "set ylabel 'P_n'\n"
       << "set xrange [1:" << c.N << "]\n"
       << "set style fill solid 0.6\n";
    for (int m : c.impurities) os << "set arrow from " << m << ", graph 0 to " << m << ", graph 1 nohead dt 2 lc rgb 'gray'\n";
    os << "set title 'n0 = " << n0 << "'\n"
       << "plot 'dissipation.csv' using 1:2 with boxes notitle\n";
    return os.str();
}

std::string scan_plot(const std::vector<int>& sites) {
    std::ostringstream os;
    os << "# Dissipation probability at monitored sites versus ln(eta)\n"
       << "set datafile separator ','\n"
       << "set terminal pngcairo size 900,600\n"
       << "set output 'scan.png'\n"
       << "set xlabel 'ln eta'\n"
       << "set ylabel 'P_n'\n"
       << "set key outside right\n"
       << "sites = '";
    for (std::size_t i = 0; i < sites.size(); ++i) os << (i ? " " : "") << sites[i];
    os << "'\n"
       << "plot for [s in sites] 'scan.csv' using 1:($2 == s+0 ? $3 : 1/0) with linespoints pt 7 ps 0.6 title 'n = '.s\n";
    return os.str();
}

int run_dynamics(const DynamicsArgs& a, const std::vector<std::string>& raw, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    RunConfig rc = load_config(a.config);
    if (a.n0) rc.dynamics.n0 = a.n0;
    if (a.dt) rc.dynamics.controls.dt = *a.dt;
    if (a.t_max) rc.dynamics.controls.t_max = *a.t_max;
    if (a.eps_stop) rc.dynamics.controls.eps_stop = *a.eps_stop;
    if (!rc.dynamics.n0) throw Error(ErrorCode::Usage, "initial cell missing: pass --n0 or set [dynamics] n0");
    const LatticeConfig& c = rc.lattice;
    const int n0 = *rc.dynamics.n0;
    initial_state(c, n0);
    const bool scanning = !a.scan.empty();
    OutputSet files(a.out);
    int code = kOk;

    if (!scanning) {
        const DissipationProfile prof = dissipation_profile(c, n0, rc.dynamics.controls);
        std::ostringstream dis;
        CsvWriter w(dis, "n,P_n (integrated loss probability at the B site of cell n)");
        for (int n = 1; n <= c.N; ++n) {
            w.cell(n).cell(prof.at(n));
            w.end_row();
        }
        files.write("dissipation.csv", dis.str());
        const std::size_t stride = std::max<std::size_t>(1, (prof.times.size() + kMaxSurvivalRows - 1) / kMaxSurvivalRows);
        std::ostringstream sur;
        CsvWriter s(sur, "t,S (survival probability; every " + std::to_string(stride) + "th step of dt = " +
                             format_real(prof.dt) + ", final sample always kept)");
        for (std::size_t k = 0; k < prof.times.size(); ++k) {
            if (k % stride != 0 && k + 1 != prof.times.size()) continue;
            s.cell(prof.times[k]).cell(prof.survival[k]);
            s.end_row();
        }
        files.write("survival.csv", sur.str());
        files.write("plot_dissipation.gp", dissipation_plot(c, n0));
        out << "dynamics: sum P = " << format_real(prof.total()) << ", S(T) = " << format_real(prof.tail_bound)
            << ", T = " << format_real(prof.stop_time) << (prof.tail_too_fat ? " (tail_too_fat)" : "") << '\n';
        for (const auto& region : burst_regions(c)) {
            out << "  burst region (" << region.first << ", " << region.second << "): "
                << (burst_triggered(prof, region) ? "triggered" : "not triggered") << '\n';
        }
    } else {
        const ScanSpec spec = parse_scan(a.scan, rc.scan);
        std::vector<int> sites = a.sites.empty() ? rc.scan.sites : a.sites;
        if (sites.empty()) throw Error(ErrorCode::Usage, "scan needs monitored sites: pass --sites or set [scan] sites");
        const std::vector<double> grid = linspace(spec.lo, spec.hi, spec.steps);
        ScanOptions so;
        so.controls = rc.dynamics.controls;
        so.threads = a.threads;
        so.drop_fraction = a.drop_fraction;
        const BurstScanResult scan = eta_scan(c, grid, n0, sites, so);

        std::ostringstream data;
        CsvWriter w(data, "ln_eta,site,P (dissipation probability at the B site of the monitored cell)");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            for (std::size_t s = 0; s < sites.size(); ++s) {
                w.cell(grid[i]).cell(sites[s]).cell(scan.curves[s][i]);
                w.end_row();
            }
        }
        files.write("scan.csv", data.str());
        std::ostringstream summary;
        CsvWriter ws(summary, "site,shape_tag,drop_threshold (ln eta; nan when the curve never drops below " +
                                  format_real(a.drop_fraction) + " of its positive-side maximum)");
        for (std::size_t s = 0; s < sites.size(); ++s) {
            ws.cell(sites[s]).cell(std::string_view(to_string(scan.shapes[s]))).cell(real_or_nan(scan.drop_thresholds[s]));
            ws.end_row();
            out << "  site " << sites[s] << ": " << to_string(scan.shapes[s]) << ", drop threshold "
                << real_or_nan(scan.drop_thresholds[s]) << '\n';
        }
        files.write("summary.csv", summary.str());
        std::ostringstream status;
        CsvWriter wp(status, "ln_eta,status,normalization_defect,tail_bound");
        std::size_t failed = 0;
        for (const ScanPoint& p : scan.points) {
            wp.cell(p.ln_eta).cell(std::string_view(p.status)).cell(p.normalization_defect).cell(p.tail_bound);
            wp.end_row();
            if (!p.ok) ++failed;
        }
        files.write("scan_points.csv", status.str());
        files.write("plot_scan.gp", scan_plot(sites));
        out << "scan: " << grid.size() << " points, " << failed << " failed\n";
        if (failed > 0) code = kNumerical;
    }
    files.finish("dynamics", config_json(rc), args_json(raw),
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return code;
}

// --- validate -------------------------------------------------------------

struct ValidateArgs {
    std::string suite = "quick";
    std::string out;
    std::vector<int> only;
    unsigned threads = 0;
    bool flip_drift = false;
};

int run_validate(const ValidateArgs& a, const std::vector<std::string>& raw, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    SuiteOptions options;
    options.suite = a.suite == "full" ? Suite::Full : Suite::Quick;
    options.threads = a.threads;
    options.build.flip_drift = a.flip_drift;
    std::vector<CriterionResult> results;
    auto report = [&](const CriterionResult& r) {
        write_report_line(out, r);
        out.flush();
        results.push_back(r);
    };
    if (a.only.empty()) {
        run_suite(options, report);
    } else {
        for (int id : a.only) report(run_criterion(id, options));
    }
    std::vector<int> failing;
    for (const auto& r : results) {
        if (!r.passed()) failing.push_back(r.id);
    }
    if (!a.out.empty()) {
        OutputSet files(a.out);
        std::ostringstream table;
        CsvWriter w(table, "criterion,name,passed,seconds,budget_seconds,detail");
        for (const auto& r : results) {
            std::string detail = r.detail;
            std::replace(detail.begin(), detail.end(), ',', ';');
            w.cell(r.id).cell(std::string_view(r.name)).cell(std::string_view(r.passed() ? "pass" : "fail"));
            w.cell(r.seconds).cell(r.budget_seconds).cell(std::string_view(detail));
            w.end_row();
        }
        files.write("validation.csv", table.str());
        files.finish("validate", ordered_json::object(), args_json(raw),
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    if (failing.empty()) {
        out << "all " << results.size() << " criteria passed\n";
        return kOk;
    }
    out << "failing criteria:";
    for (int id : failing) out << ' ' << id;
    out << '\n';
    return kSuiteFailed;
}

void emit_error(std::ostream& err, std::string_view id, const std::string& message) {
    ordered_json rec;
    rec["error"] = id;
    rec["message"] = message;
    err << rec.dump() << '\n';
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::Io, "sha256 digest failed");
    }
    std::ostringstream os;
    os << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(md[i]);
    return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dissipative cross-stitch lattice: spectra, eigenstates, loss dynamics"};
    app.name("skinburst");
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(SKINBURST_VERSION_STRING));

    SpectrumArgs sa;
    auto* spectrum = app.add_subcommand("spectrum", "Diagonalize and export the complex spectrum");
    spectrum->add_option("--config", sa.config, "Config file")->required();
    spectrum->add_option("--out", sa.out, "Output directory");
    spectrum->add_option("--limit", sa.limit, "Also export an analytic limit spectrum")
        ->check(CLI::IsMember({"eta_zero", "eta_inf", "pbc"}));
    spectrum->add_flag("--classify", sa.classify, "Tag loop and detached eigenvalues");

    EigenstateArgs ea;
    auto* eigen = app.add_subcommand("eigenstates", "Eigenstate profiles and Lyapunov tables");
    eigen->add_option("--config", ea.config, "Config file")->required();
    eigen->add_option("--out", ea.out, "Output directory");
    eigen->add_option("--select", ea.select, "States to export")
        ->check(CLI::IsMember({"max_im", "min_im", "max_re", "min_positive_re"}));
    eigen->add_option("--loop", ea.loop, "Spectral loop")->check(CLI::IsMember({"left", "right"}));
    eigen->add_option("--method", ea.method, "Profile source")->check(CLI::IsMember({"vector", "recursion"}));

    DynamicsArgs da;
    auto* dyn = app.add_subcommand("dynamics", "Dissipation profile or ln(eta) scan");
    dyn->add_option("--config", da.config, "Config file")->required();
    dyn->add_option("--out", da.out, "Output directory");
    dyn->add_option("--n0", da.n0, "Initial unit cell (A sublattice)");
    dyn->add_option("--scan", da.scan, "lneta_min:lneta_max:steps, or 'config'");
    dyn->add_option("--sites", da.sites, "Monitored cells for a scan")->delimiter(',');
    dyn->add_option("--drop-fraction", da.drop_fraction, "Fraction of the peak defining the drop threshold");
    dyn->add_option("--threads", da.threads, "Worker threads (0: SKINBURST_THREADS or all cores)");
    dyn->add_option("--dt", da.dt, "Time step");
    dyn->add_option("--t-max", da.t_max, "Time horizon");
    dyn->add_option("--eps-stop", da.eps_stop, "Stop once survival falls below this");

    ValidateArgs va;
    auto* val = app.add_subcommand("validate", "Run the acceptance suite");
    val->add_option("--suite", va.suite, "quick or full")->check(CLI::IsMember({"quick", "full"}));
    val->add_option("--out", va.out, "Write validation.csv and a manifest here");
    val->add_option("--only", va.only, "Run only these criterion ids")->delimiter(',');
    val->add_option("--threads", va.threads, "Worker threads for scans");
    val->add_flag("--flip-drift", va.flip_drift, "Reverse the drift terms (mutation check)")->group("");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << SKINBURST_VERSION_STRING << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        emit_error(err, error_id(ErrorCode::Usage), e.what());
        return kUsage;
    }

    try {
        if (spectrum->parsed()) return run_spectrum(sa, args, out);
        if (eigen->parsed()) return run_eigenstates(ea, args, out);
        if (dyn->parsed()) return run_dynamics(da, args, out);
        return run_validate(va, args, out);
    } catch (const Error& e) {
        emit_error(err, error_id(e.code()), e.what());
        return is_usage_error(e.code()) ? kUsage : kNumerical;
    } catch (const std::exception& e) {
        emit_error(err, "internal_error", e.what());
        return kNumerical;
    }
}

}  // namespace skinburst::cli

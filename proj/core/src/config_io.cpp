#include "skinburst/config_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <locale>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include "skinburst/csv.hpp"
#include "skinburst/error.hpp"

namespace skinburst {

namespace {

using Value = std::variant<double, long long, std::vector<long long>>;

struct Entry {
    Value value;
    int line = 0;
};

[[noreturn]] void fail(std::string_view origin, int line, const std::string& what) {
    std::ostringstream msg;
    msg << origin << ':' << line << ": " << what;
    throw Error(ErrorCode::ConfigParse, msg.str());
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::optional<long long> parse_int(std::string_view s) {
    long long v = 0;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<double> parse_real(std::string_view s) {
    double v = 0.0;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

Value parse_value(std::string_view text, std::string_view origin, int line) {
    if (text.empty()) fail(origin, line, "missing value");
    if (text.front() == '[') {
        if (text.back() != ']') fail(origin, line, "unterminated list");
        std::vector<long long> items;
        std::string_view body = trim(text.substr(1, text.size() - 2));
        while (!body.empty()) {
            const auto comma = body.find(',');
            const std::string_view item = trim(body.substr(0, comma));
            if (item.empty()) {
                if (comma == std::string_view::npos) break;
                fail(origin, line, "empty list item");
            }
            const auto v = parse_int(item);
            if (!v) fail(origin, line, "list items must be integers, got '" + std::string(item) + "'");
            items.push_back(*v);
            if (comma == std::string_view::npos) break;
            body = trim(body.substr(comma + 1));
        }
        return items;
    }
    if (const auto i = parse_int(text)) return *i;
    if (const auto d = parse_real(text)) return *d;
    fail(origin, line, "cannot parse value '" + std::string(text) + "'");
}

using Section = std::map<std::string, Entry, std::less<>>;

double as_real(const Entry& e, std::string_view key, std::string_view origin) {
    if (const auto* d = std::get_if<double>(&e.value)) return *d;
    if (const auto* i = std::get_if<long long>(&e.value)) return static_cast<double>(*i);
    fail(origin, e.line, std::string(key) + " must be a number");
}

int as_int(const Entry& e, std::string_view key, std::string_view origin) {
    if (const auto* i = std::get_if<long long>(&e.value)) {
        if (*i < std::numeric_limits<int>::min() || *i > std::numeric_limits<int>::max()) {
            fail(origin, e.line, std::string(key) + " out of range");
        }
        return static_cast<int>(*i);
    }
    fail(origin, e.line, std::string(key) + " must be an integer");
}

std::vector<int> as_int_list(const Entry& e, std::string_view key, std::string_view origin) {
    const auto* list = std::get_if<std::vector<long long>>(&e.value);
    if (!list) fail(origin, e.line, std::string(key) + " must be a list of integers");
    std::vector<int> out;
    for (long long v : *list) {
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
            fail(origin, e.line, std::string(key) + " item out of range");
        }
        out.push_back(static_cast<int>(v));
    }
    return out;
}

const std::map<std::string, std::set<std::string, std::less<>>, std::less<>>& known_keys() {
    static const std::map<std::string, std::set<std::string, std::less<>>, std::less<>> keys{
        {"lattice", {"N", "J", "t", "gamma", "eta", "ln_eta", "impurities"}},
        {"dynamics", {"n0", "dt", "t_max", "eps_stop"}},
        {"scan", {"lneta_min", "lneta_max", "steps", "sites"}},
    };
    return keys;
}

}  // namespace

RunConfig parse_config(std::string_view text, std::string_view origin) {
    std::map<std::string, Section, std::less<>> sections;
    std::string current;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(origin, line_no, "malformed section header");
            current = std::string(trim(line.substr(1, line.size() - 2)));
            if (!known_keys().count(current)) fail(origin, line_no, "unknown section [" + current + "]");
            if (sections.count(current)) fail(origin, line_no, "duplicate section [" + current + "]");
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(origin, line_no, "expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        if (current.empty()) fail(origin, line_no, "key '" + key + "' outside any section");
        if (!known_keys().at(current).count(key)) {
            fail(origin, line_no, "unknown key '" + key + "' in [" + current + "]");
        }
        Section& sec = sections[current];
        if (sec.count(key)) fail(origin, line_no, "duplicate key '" + key + "'");
        sec[key] = Entry{parse_value(trim(line.substr(eq + 1)), origin, line_no), line_no};
    }

    const auto lat_it = sections.find("lattice");
    if (lat_it == sections.end()) fail(origin, line_no, "missing [lattice] section");
    const Section& lat = lat_it->second;
    RunConfig out;
    LatticeConfig& c = out.lattice;
    const auto n_it = lat.find("N");
    if (n_it == lat.end()) fail(origin, line_no, "[lattice] needs N");
    c.N = as_int(n_it->second, "N", origin);
    if (auto it = lat.find("J"); it != lat.end()) c.J = as_real(it->second, "J", origin);
    if (auto it = lat.find("t"); it != lat.end()) c.t = as_real(it->second, "t", origin);
    if (auto it = lat.find("gamma"); it != lat.end()) c.gamma = as_real(it->second, "gamma", origin);
    const auto eta_it = lat.find("eta");
    const auto ln_it = lat.find("ln_eta");
    if (eta_it != lat.end() && ln_it != lat.end()) fail(origin, ln_it->second.line, "give eta or ln_eta, not both");
    if (eta_it != lat.end()) c.eta = as_real(eta_it->second, "eta", origin);
    if (ln_it != lat.end()) c.eta = std::exp(as_real(ln_it->second, "ln_eta", origin));
    if (auto it = lat.find("impurities"); it != lat.end()) c.impurities = as_int_list(it->second, "impurities", origin);
    c = validate_config(c);

    if (auto sit = sections.find("dynamics"); sit != sections.end()) {
        const Section& d = sit->second;
        if (auto it = d.find("n0"); it != d.end()) out.dynamics.n0 = as_int(it->second, "n0", origin);
        if (auto it = d.find("dt"); it != d.end()) out.dynamics.controls.dt = as_real(it->second, "dt", origin);
        if (auto it = d.find("t_max"); it != d.end()) out.dynamics.controls.t_max = as_real(it->second, "t_max", origin);
        if (auto it = d.find("eps_stop"); it != d.end()) {
            out.dynamics.controls.eps_stop = as_real(it->second, "eps_stop", origin);
        }
    }
    if (auto sit = sections.find("scan"); sit != sections.end()) {
        const Section& s = sit->second;
        if (auto it = s.find("lneta_min"); it != s.end()) out.scan.lneta_min = as_real(it->second, "lneta_min", origin);
        if (auto it = s.find("lneta_max"); it != s.end()) out.scan.lneta_max = as_real(it->second, "lneta_max", origin);
        if (auto it = s.find("steps"); it != s.end()) out.scan.steps = as_int(it->second, "steps", origin);
        if (auto it = s.find("sites"); it != s.end()) out.scan.sites = as_int_list(it->second, "sites", origin);
    }
    return out;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigNotFound, "cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

std::string format_config(const RunConfig& config) {
    const LatticeConfig& c = config.lattice;
    std::ostringstream os;
    os.imbue(std::locale::classic());
    auto list = [&](const std::vector<int>& v) {
        os << '[';
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
        os << ']';
    };
    os << "[lattice]\n"
       << "N = " << c.N << '\n'
       << "J = " << format_real(c.J) << '\n'
       << "t = " << format_real(c.t) << '\n'
       << "gamma = " << format_real(c.gamma) << '\n'
       << "eta = " << format_real(c.eta) << '\n'
       << "impurities = ";
    list(c.impurities);
    os << '\n';
    const DynamicsSettings& d = config.dynamics;
    os << "\n[dynamics]\n";
    if (d.n0) os << "n0 = " << *d.n0 << '\n';
    os << "dt = " << format_real(d.controls.dt) << '\n'
       << "t_max = " << format_real(d.controls.t_max) << '\n'
       << "eps_stop = " << format_real(d.controls.eps_stop) << '\n';
    const ScanSettings& s = config.scan;
    if (s.lneta_min || s.lneta_max || s.steps || !s.sites.empty()) {
        os << "\n[scan]\n";
        if (s.lneta_min) os << "lneta_min = " << format_real(*s.lneta_min) << '\n';
        if (s.lneta_max) os << "lneta_max = " << format_real(*s.lneta_max) << '\n';
        if (s.steps) os << "steps = " << *s.steps << '\n';
        if (!s.sites.empty()) {
            os << "sites = ";
            list(s.sites);
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace skinburst

#include "msc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace msc {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
    T out{};
    const char* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) throw ConfigError("bad value for " + key + ": '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("bad value for " + key + ": '" + v + "'");
}

std::vector<int> parse_meshes(const std::string& v) {
    std::vector<int> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const int n = parse_number<int>("meshes", item);
        if (n < 1) throw ConfigError("mesh sizes must be >= 1");
        out.push_back(n);
    }
    if (out.empty()) throw ConfigError("meshes must list at least one size");
    return out;
}

std::string fmt(double x) {
    char buf[32];
    // shortest form that reads back to the same double
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

const char* const kCommands[] = {"conserve", "mms", "run", "mesh-info"};

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    SchemeConfig& s = cfg.scheme;
    if (key == "command") {
        for (const char* c : kCommands)
            if (value == c) {
                cfg.command = value;
                return;
            }
        throw ConfigError("unknown command '" + value + "'");
    }
    if (key == "n") s.n = parse_number<int>(key, value);
    else if (key == "order") s.order = parse_number<int>(key, value);
    else if (key == "tau") s.tau = parse_number<double>(key, value);
    else if (key == "t_final") s.t_final = parse_number<double>(key, value);
    else if (key == "picard_tol") s.picard_tol = parse_number<double>(key, value);
    else if (key == "picard_max_iters") s.picard_max_iters = parse_number<int>(key, value);
    else if (key == "linear_tol") s.linear_tol = parse_number<double>(key, value);
    else if (key == "example") s.example = parse_example(value);
    else if (key == "potential") s.potential = value;
    else if (key == "div_fix") s.div_fix = parse_bool(key, value);
    else if (key == "out") cfg.out = value;
    else if (key == "vtk_every") {
        cfg.vtk_every = parse_number<int>(key, value);
        if (cfg.vtk_every < 0) throw ConfigError("vtk_every must be >= 0");
    } else if (key == "meshes") cfg.meshes = parse_meshes(value);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
    else throw ConfigError("unknown key '" + key + "'");
}

RunConfig parse_config(std::string_view text, RunConfig base) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        apply_setting(base, key, value);
    }
    return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

std::string serialize_config(const RunConfig& cfg) {
    const SchemeConfig& s = cfg.scheme;
    std::ostringstream o;
    o << "command = " << cfg.command << '\n'
      << "n = " << s.n << '\n'
      << "order = " << s.order << '\n'
      << "tau = " << fmt(s.tau) << '\n'
      << "t_final = " << fmt(s.t_final) << '\n'
      << "picard_tol = " << fmt(s.picard_tol) << '\n'
      << "picard_max_iters = " << s.picard_max_iters << '\n'
      << "linear_tol = " << fmt(s.linear_tol) << '\n'
      << "example = " << example_name(s.example) << '\n'
      << "potential = " << s.potential << '\n'
      << "div_fix = " << (s.div_fix ? "true" : "false") << '\n'
      << "out = " << cfg.out << '\n'
      << "vtk_every = " << cfg.vtk_every << '\n'
      << "meshes = ";
    for (std::size_t i = 0; i < cfg.meshes.size(); ++i) o << (i ? "," : "") << cfg.meshes[i];
    o << '\n' << "seed = " << cfg.seed << '\n';
    return o.str();
}

bool operator==(const SchemeConfig& a, const SchemeConfig& b) {
    return a.n == b.n && a.order == b.order && a.tau == b.tau && a.t_final == b.t_final &&
           a.picard_tol == b.picard_tol && a.picard_max_iters == b.picard_max_iters && a.linear_tol == b.linear_tol &&
           a.example == b.example && a.potential == b.potential && a.div_fix == b.div_fix;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.command == b.command && a.scheme == b.scheme && a.out == b.out && a.vtk_every == b.vtk_every &&
           a.meshes == b.meshes && a.seed == b.seed;
}

}  // namespace msc

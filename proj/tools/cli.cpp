#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "json.hpp"

namespace chemoproof::cli {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double to_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(t, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": not a number: '" + text + "'");
    }
    if (used != t.size() || !std::isfinite(x)) throw ConfigError(key + ": not a number: '" + text + "'");
    return x;
}

int to_int(const std::string& key, const std::string& text) {
    const double x = to_double(key, text);
    if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError(key + ": not an integer: '" + text + "'");
    return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "yes" || t == "1") return true;
    if (t == "false" || t == "no" || t == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

// "3*pi", "pi", "2.5": value and an enclosure of it
struct Endpoint {
    double value = 0.0;
    Enclosure enclosure{0.0};
};

Endpoint parse_endpoint(const std::string& key, const std::string& text) {
    std::string t = trim(text);
    t.erase(std::remove(t.begin(), t.end(), ' '), t.end());
    const std::string suffix = "pi";
    if (t.size() >= 2 && t.compare(t.size() - 2, 2, suffix) == 0) {
        std::string k = t.substr(0, t.size() - 2);
        if (!k.empty() && k.back() == '*') k.pop_back();
        const double c = k.empty() ? 1.0 : to_double(key, k);
        return {c * M_PI, Enclosure(c) * pi()};
    }
    const double x = to_double(key, t);
    return {x, Enclosure(x)};
}

std::vector<double> parse_grid(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) return {};
    if (t.find(':') != std::string::npos) {
        const auto parts = split(t, ':');
        if (parts.size() != 3) throw ConfigError("sweep.sigma: expected lo:hi:count");
        const double lo = to_double("sweep.sigma", parts[0]);
        const double hi = to_double("sweep.sigma", parts[1]);
        const int n = to_int("sweep.sigma", parts[2]);
        if (n < 1 || !(hi >= lo)) throw ConfigError("sweep.sigma: need count >= 1 and hi >= lo");
        std::vector<double> g;
        for (int i = 0; i < n; ++i) g.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
        return g;
    }
    std::vector<double> g;
    for (const auto& s : split(t, ',')) g.push_back(to_double("sweep.sigma", s));
    return g;
}

template <class T, class F>
std::vector<T> parse_list(const std::string& key, const std::string& text, F conv) {
    std::vector<T> out;
    if (trim(text).empty()) return out;
    for (const auto& s : split(text, ',')) out.push_back(conv(key, s));
    return out;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> k{
        {"model", {"sigma", "d", "a", "b", "gamma", "P", "Q", "alpha", "shift"}},
        {"proof", {"nu", "N", "K", "rstar", "max_halvings"}},
        {"finder", {"tol", "maxit", "seed_mode", "seed_amplitude", "seed_method"}},
        {"sweep", {"sigma", "modes", "amplitudes", "relax", "threads"}},
        {"output", {"dir"}},
    };
    return k;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

double mode_mu(const Geometry& g, int n) {
    const double k = n * M_PI / (g.b - g.a);
    return k * k;
}

FloatSeqPair seed_state(const RunConfig& c) {
    const Params& p = c.params;
    FloatSeqPair s = FloatSeqPair::homogeneous(p.geom, c.N);
    if (c.seed_mode == 0) return s;
    const auto m = static_cast<std::size_t>(c.seed_mode);
    s.u[m] += 0.5 * c.seed_amplitude;
    // newton seeds put v on the linear response of u
    s.v[m] += c.seed_method == "newton" ? 0.5 * c.seed_amplitude / (1.0 + p.d * mode_mu(p.geom, c.seed_mode))
                                        : 0.5 * c.seed_amplitude;
    return s;
}

CertifyOptions certify_options(const RunConfig& c) {
    CertifyOptions o;
    o.rstar = c.rstar;
    o.K = c.K;
    o.N = c.N;
    o.max_halvings = c.max_halvings;
    return o;
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

}  // namespace

Geometry parse_domain(const std::string& a, const std::string& b, double nu) {
    const Endpoint ea = parse_endpoint("model.a", a);
    const Endpoint eb = parse_endpoint("model.b", b);
    try {
        return Geometry(ea.value, eb.value, nu, eb.enclosure - ea.enclosure);
    } catch (const GeometryError& e) {
        throw ConfigError(e.what());
    }
}

RunConfig parse_config(std::istream& is, const std::string& name) {
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(name + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    std::map<std::string, std::string> kv;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) throw ConfigError(name + ": key '" + section + "' outside a section");
        const auto it = known_keys().find(section);
        if (it == known_keys().end()) throw ConfigError(name + ": unknown section [" + section + "]");
        for (const auto& [key, value] : body) {
            if (!it->second.count(key)) throw ConfigError(name + ": unknown key " + section + "." + key);
            kv[section + "." + key] = value.data();
        }
    }
    auto get = [&](const std::string& k) -> const std::string* {
        const auto it = kv.find(k);
        return it == kv.end() ? nullptr : &it->second;
    };
    auto require = [&](const std::string& k) -> const std::string& {
        const std::string* v = get(k);
        if (!v) throw ConfigError(name + ": missing " + k);
        return *v;
    };

    RunConfig c;
    // [proof] first: the geometry needs nu
    double nu = 1.0001;
    if (auto v = get("proof.nu")) nu = to_double("proof.nu", *v);
    if (!(nu > 1.0)) throw ConfigError(name + ": proof.nu must be > 1");
    if (auto v = get("proof.N")) c.N = to_int("proof.N", *v);
    if (c.N < 4) throw ConfigError(name + ": proof.N must be >= 4");
    if (auto v = get("proof.K")) c.K = to_int("proof.K", *v);
    if (c.K != 0 && c.K < 4 * c.N - 1) throw ConfigError(name + ": proof.K must be 0 or >= 4N - 1");
    if (auto v = get("proof.rstar")) c.rstar = to_double("proof.rstar", *v);
    if (!(c.rstar > 0.0)) throw ConfigError(name + ": proof.rstar must be > 0");
    if (auto v = get("proof.max_halvings")) c.max_halvings = to_int("proof.max_halvings", *v);
    if (c.max_halvings < 0) throw ConfigError(name + ": proof.max_halvings must be >= 0");

    Params& p = c.params;
    p.sigma = to_double("model.sigma", require("model.sigma"));
    if (auto v = get("model.d")) p.d = to_double("model.d", *v);
    const std::string a = get("model.a") ? *get("model.a") : "0";
    p.geom = parse_domain(a, require("model.b"), nu);

    const std::string kind = trim(require("model.gamma"));
    std::set<std::string> allowed;
    if (kind == "rational") {
        const std::string P = get("model.P") ? *get("model.P") : "1";
        const std::string Q = get("model.Q") ? *get("model.Q") : "1";
        try {
            p.gamma = Rational{Polynomial::parse(P), Polynomial::parse(Q)};
        } catch (const std::exception& e) {
            throw ConfigError(name + ": model.P/Q: " + e.what());
        }
        allowed = {"P", "Q"};
    } else if (kind == "expfraction") {
        ExpFraction g;
        if (auto v = get("model.alpha")) g.alpha = to_double("model.alpha", *v);
        if (auto v = get("model.shift")) g.shift = to_double("model.shift", *v);
        p.gamma = g;
        allowed = {"alpha", "shift"};
    } else if (kind == "exp") {
        ScaledExp g;
        if (auto v = get("model.alpha")) g.alpha = to_double("model.alpha", *v);
        p.gamma = g;
        allowed = {"alpha"};
    } else {
        throw ConfigError(name + ": model.gamma must be rational, expfraction or exp");
    }
    for (const char* k : {"P", "Q", "alpha", "shift"}) {
        if (get(std::string("model.") + k) && !allowed.count(k)) {
            throw ConfigError(name + ": model." + k + " does not apply to gamma = " + kind);
        }
    }
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(name + ": " + e.what());
    }

    if (auto v = get("finder.tol")) c.tol = to_double("finder.tol", *v);
    if (!(c.tol > 0.0)) throw ConfigError(name + ": finder.tol must be > 0");
    if (auto v = get("finder.maxit")) c.maxit = to_int("finder.maxit", *v);
    if (auto v = get("finder.seed_mode")) c.seed_mode = to_int("finder.seed_mode", *v);
    if (c.seed_mode < 0 || c.seed_mode > c.N) throw ConfigError(name + ": finder.seed_mode must be in [0, N]");
    if (auto v = get("finder.seed_amplitude")) c.seed_amplitude = to_double("finder.seed_amplitude", *v);
    if (auto v = get("finder.seed_method")) c.seed_method = trim(*v);
    if (c.seed_method != "relax" && c.seed_method != "newton") {
        throw ConfigError(name + ": finder.seed_method must be relax or newton");
    }

    if (auto v = get("sweep.sigma")) c.sigma_grid = parse_grid(*v);
    for (double s : c.sigma_grid) {
        if (!(s >= 0.0)) throw ConfigError(name + ": sweep.sigma values must be >= 0");
    }
    if (auto v = get("sweep.modes")) c.modes = parse_list<int>("sweep.modes", *v, to_int);
    for (int m : c.modes) {
        if (m < 1) throw ConfigError(name + ": sweep.modes must be positive");
    }
    if (auto v = get("sweep.amplitudes")) c.amplitudes = parse_list<double>("sweep.amplitudes", *v, to_double);
    if (auto v = get("sweep.relax")) c.relax = to_bool("sweep.relax", *v);
    if (auto v = get("sweep.threads")) c.threads = to_int("sweep.threads", *v);
    if (c.threads < 1) throw ConfigError(name + ": sweep.threads must be >= 1");

    if (auto v = get("output.dir")) c.out_dir = trim(*v);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::istringstream is(read_file(path));
    return parse_config(is, path);
}

SeqPair load_candidate(const std::string& path, const Params& p) {
    std::istringstream is(read_file(path));
    SeqPair U;
    try {
        U = read_geoseq(is);
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    const Geometry& g = U.u.geom;
    if (g.a != p.geom.a || g.b != p.geom.b || g.nu != p.geom.nu) {
        throw ConfigError(path + ": domain or nu differ from the configuration");
    }
    U.u.geom = p.geom;
    U.v.geom = p.geom;
    return U;
}

std::string default_candidate_path(const RunConfig& c) { return (fs::path(c.out_dir) / "candidate.geoseq").string(); }

int cmd_find(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const FloatSeqPair start = seed_state(c);
    NewtonResult r;
    if (c.seed_mode > 0 && c.seed_method == "relax") {
        r = relax_then_refine(start, c.params, c.tol, c.maxit);
    } else {
        r = newton_refine(start, c.params, c.tol, c.maxit);
    }
    if (!r.converged) {
        err << "find: no convergence (residual " << fmt("%.3e", r.residual) << "): " << r.message << '\n';
        return kExitNoConvergence;
    }
    const fs::path path = default_candidate_path(c);
    std::ostringstream os;
    write_geoseq(os, r.state.to_seqpair());
    write_file(path, os.str());
    out << "FOUND amplitude=" << fmt("%.6f", amplitude(r.state)) << " residual=" << fmt("%.3e", r.residual)
        << " iterations=" << r.iterations << " -> " << path.string() << '\n';
    return kExitOk;
}

int cmd_certify(const RunConfig& c, const std::string& input, std::ostream& out, std::ostream& err) {
    const std::string path = input.empty() ? default_candidate_path(c) : input;
    const SeqPair U = load_candidate(path, c.params);
    Certificate cert = certify(U, c.params, certify_options(c));
    cert.input_digest = sha256_hex(read_file(path));
    const fs::path cpath = fs::path(c.out_dir) / "certificate.json";
    write_file(cpath, certificate_json(cert));
    out << status_line(cert) << '\n';
    out << "rmax=" << fmt("%.4e", cert.r_max.lo) << " rstar=" << fmt("%.4e", cert.rstar) << " -> " << cpath.string()
        << '\n';
    if (!cert.proved()) {
        err << "certify: " << cert.message << '\n';
        return kExitNotProved;
    }
    return kExitOk;
}

int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream&) {
    SweepOptions o;
    o.N = c.N;
    o.tol = c.tol;
    o.maxit = c.maxit;
    o.modes = c.modes;
    o.seed_amplitudes = c.amplitudes;
    o.relax = c.relax;
    o.threads = c.threads;
    const std::vector<BranchPoint> pts = sweep_diagram(c.params, c.sigma_grid, o);

    const fs::path root(c.out_dir);
    fs::create_directories(root);
    const int n = static_cast<int>(pts.size());
    std::vector<std::string> geoseq(static_cast<std::size_t>(n)), json(static_cast<std::size_t>(n)),
        status(static_cast<std::size_t>(n));
    parallel_for(n, c.threads, [&](int i) {
        const BranchPoint& bp = pts[static_cast<std::size_t>(i)];
        const auto k = static_cast<std::size_t>(i);
        if (!bp.converged) {
            status[k] = "UNCONVERGED";
            return;
        }
        Params q = c.params;
        q.sigma = bp.sigma;
        const SeqPair U = bp.state.to_seqpair();
        std::ostringstream os;
        write_geoseq(os, U);
        geoseq[k] = os.str();
        Certificate cert = certify(U, q, certify_options(c));
        cert.input_digest = sha256_hex(geoseq[k]);
        auto j = nlohmann::ordered_json::parse(certificate_json(cert));
        j["sweep"] = {{"index", i}, {"sigma", bp.sigma}, {"amplitude", bp.amplitude}, {"residual", bp.residual}};
        json[k] = j.dump(2) + "\n";
        status[k] = to_string(cert.status);
    });

    // single writer
    std::ostringstream index;
    index << "sigma,amplitude,converged,certificate_path,status\n";
    int converged = 0, proved = 0;
    for (int i = 0; i < n; ++i) {
        const BranchPoint& bp = pts[static_cast<std::size_t>(i)];
        const auto k = static_cast<std::size_t>(i);
        char stem[32];
        std::snprintf(stem, sizeof stem, "point_%04d", i);
        std::string cpath;
        if (bp.converged) {
            ++converged;
            write_file(root / "points" / (std::string(stem) + ".geoseq"), geoseq[k]);
            cpath = (fs::path("certificates") / (std::string(stem) + ".json")).string();
            write_file(root / cpath, json[k]);
            if (status[k] == "PROVED") ++proved;
        }
        index << fmt("%.17g", bp.sigma) << ',' << fmt("%.17g", bp.amplitude) << ',' << (bp.converged ? 1 : 0) << ','
              << cpath << ',' << status[k] << '\n';
    }
    write_file(root / "index.csv", index.str());
    out << "SWEEP sigma_points=" << c.sigma_grid.size() << " states=" << n << " converged=" << converged
        << " proved=" << proved << " failed=" << converged - proved << " -> " << (root / "index.csv").string() << '\n';
    return kExitOk;
}

std::vector<IndexRow> read_index(const std::string& path) {
    std::istringstream is(read_file(path));
    std::string line;
    if (!std::getline(is, line) || trim(line) != "sigma,amplitude,converged,certificate_path,status") {
        throw ConfigError(path + ": not a sweep index");
    }
    std::vector<IndexRow> rows;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 5) throw ConfigError(path + ": malformed row '" + line + "'");
        IndexRow r;
        r.sigma = to_double("sigma", f[0]);
        r.amplitude = to_double("amplitude", f[1]);
        r.converged = to_int("converged", f[2]) != 0;
        r.certificate_path = f[3];
        r.status = f[4];
        rows.push_back(r);
    }
    return rows;
}

std::string render_svg(const std::vector<IndexRow>& rows) {
    const double W = 720, H = 480, L = 70, R = 20, T = 30, B = 60;
    double smin = 0.0, smax = 1.0, amax = 1.0;
    bool first = true;
    for (const auto& r : rows) {
        if (!r.converged) continue;
        if (first) {
            smin = smax = r.sigma;
            first = false;
        }
        smin = std::min(smin, r.sigma);
        smax = std::max(smax, r.sigma);
        amax = std::max(amax, r.amplitude);
    }
    if (smax <= smin) smax = smin + 1.0;
    amax *= 1.05;
    auto X = [&](double s) { return L + (s - smin) / (smax - smin) * (W - L - R); };
    auto Y = [&](double a) { return H - B - a / amax * (H - T - B); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
       << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double s = smin + (smax - smin) * i / 5, a = amax * i / 5;
        os << "<text x=\"" << fmt("%.2f", X(s)) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
           << fmt("%.3g", s) << "</text>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << fmt("%.2f", Y(a) + 4) << "\" text-anchor=\"end\">"
           << fmt("%.3g", a) << "</text>\n";
    }
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">sigma</text>\n";
    os << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << (T + H - B) / 2 << ")\">max u - min u</text>\n";
    for (const auto& r : rows) {
        if (!r.converged) continue;
        const bool ok = r.status == "PROVED";
        os << "<circle cx=\"" << fmt("%.2f", X(r.sigma)) << "\" cy=\"" << fmt("%.2f", Y(r.amplitude))
           << "\" r=\"4\" stroke=\"black\" fill=\"" << (ok ? "black" : "none") << "\"><title>sigma="
           << fmt("%.6g", r.sigma) << " amplitude=" << fmt("%.6g", r.amplitude) << ' ' << r.status
           << "</title></circle>\n";
    }
    os << "<circle cx=\"" << W - R - 150 << "\" cy=\"" << T << "\" r=\"4\" stroke=\"black\" fill=\"black\"/>"
       << "<text x=\"" << W - R - 140 << "\" y=\"" << T + 4 << "\">proved</text>\n";
    os << "<circle cx=\"" << W - R - 80 << "\" cy=\"" << T << "\" r=\"4\" stroke=\"black\" fill=\"none\"/>"
       << "<text x=\"" << W - R - 70 << "\" y=\"" << T + 4 << "\">not proved</text>\n";
    os << "</svg>\n";
    return os.str();
}

int cmd_render(const std::string& index_csv, const std::string& out_dir, std::ostream& out, std::ostream&) {
    const std::vector<IndexRow> rows = read_index(index_csv);
    const fs::path root(out_dir);
    write_file(root / "diagram.svg", render_svg(rows));
    std::ostringstream csv;
    csv << "sigma,amplitude,status\n";
    int shown = 0;
    for (const auto& r : rows) {
        if (!r.converged) continue;
        ++shown;
        csv << fmt("%.17g", r.sigma) << ',' << fmt("%.17g", r.amplitude) << ',' << r.status << '\n';
    }
    write_file(root / "diagram.csv", csv.str());
    out << "RENDER points=" << shown << " -> " << (root / "diagram.svg").string() << '\n';
    return kExitOk;
}

}  // namespace chemoproof::cli

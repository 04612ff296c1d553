#include "surge/model.hpp"
#include "surge/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace surge {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double GaussianBump::operator()(double z) const {
    const double d = z - center;
    return amplitude * std::exp(-beta * d * d);
}

double GaussianBump::derivative(double z) const {
    const double d = z - center;
    return amplitude * (-2.0 * beta * d) * std::exp(-beta * d * d);
}

double ModeProfile::eval(double z) const {
    double s = 0.0;
    for (const auto& b : bumps) s += b(z);
    return s;
}

double ModeProfile::deriv(double z) const {
    double s = 0.0;
    for (const auto& b : bumps) s += b.derivative(z);
    return s;
}

Vector Nonlinearity::eval(const Vector& u) const {
    return (c1.array() * u.array() + c2.array() * u.array().square()).matrix();
}

Vector Nonlinearity::jacobian_diag(const Vector& u) const {
    return (c1.array() + 2.0 * c2.array() * u.array()).matrix();
}

double Nonlinearity::max_abs_derivative(double amp) const {
    return (c1.array().abs() + 2.0 * c2.array().abs() * amp).maxCoeff();
}

bool Nonlinearity::is_zero() const {
    return c1.isZero(0.0) && c2.isZero(0.0);
}

double ProblemSpec::speed_floor() const {
    return speeds.array().abs().minCoeff();
}

double ProblemSpec::dot(const Vector& a, const Vector& b) const {
    return (weights.array() * a.array() * b.array()).sum();
}

// ---------------------------------------------------------------------------
// document parsing

namespace {

struct Line {
    int number;
    std::string text;
};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw ConfigError("line " + std::to_string(line) + ": " + what);
}

double parse_real(const std::string& tok, int line, const std::string& field) {
    try {
        size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument("trailing junk");
        if (!std::isfinite(v)) throw std::invalid_argument("not finite");
        return v;
    } catch (const std::exception&) {
        fail(line, "cannot parse real '" + tok + "' in field '" + field + "'");
    }
}

std::vector<double> parse_list(const std::string& value, int line, const std::string& field) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) fail(line, "empty entry in field '" + field + "'");
        out.push_back(parse_real(tok, line, field));
    }
    if (out.empty()) fail(line, "field '" + field + "' has no values");
    return out;
}

} // namespace

ProblemSpec load_problem(const std::string& text) {
    // key -> (value, line), grouped by section
    std::map<std::string, std::map<std::string, std::pair<std::string, int>>> doc;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        auto hash = raw.find_first_of("#;");
        // ';' separates bumps inside [initial] values, so only strip comments
        // that start the line; '#' comments anywhere.
        if (hash != std::string::npos && raw[hash] == '#') raw = raw.substr(0, hash);
        std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) fail(lineno, "empty section name");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) fail(lineno, "expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (section.empty()) fail(lineno, "key '" + key + "' outside any section");
        if (key.empty()) fail(lineno, "empty key");
        if (doc[section].count(key)) fail(lineno, "duplicate key '" + key + "' in [" + section + "]");
        doc[section][key] = {value, lineno};
    }

    auto get = [&](const std::string& sec, const std::string& key,
                   bool required) -> const std::pair<std::string, int>* {
        auto s = doc.find(sec);
        if (s == doc.end() || !s->second.count(key)) {
            if (required)
                throw ConfigError("missing required field '" + key + "' in [" + sec + "]");
            return nullptr;
        }
        return &s->second.at(key);
    };

    ProblemSpec spec;

    const auto* mkv = get("operator", "m", true);
    {
        double mv = parse_real(mkv->first, mkv->second, "m");
        if (mv != std::floor(mv) || mv < 2 || mv > 64)
            fail(mkv->second, "m must be an integer >= 2 (field: m)");
        spec.m = static_cast<int>(mv);
    }
    const int m = spec.m;

    spec.relaxation.resize(m, m);
    for (int i = 0; i < m; ++i) {
        std::string key = "row" + std::to_string(i);
        const auto* kv = get("operator", key, true);
        auto vals = parse_list(kv->first, kv->second, key);
        if (static_cast<int>(vals.size()) != m)
            fail(kv->second, "expected " + std::to_string(m) + " values in '" + key + "'");
        for (int j = 0; j < m; ++j) spec.relaxation(i, j) = vals[j];
    }

    {
        const auto* kv = get("operator", "weights", true);
        auto vals = parse_list(kv->first, kv->second, "weights");
        if (static_cast<int>(vals.size()) != m)
            fail(kv->second, "expected " + std::to_string(m) + " values in 'weights'");
        spec.weights = Eigen::Map<Vector>(vals.data(), m);
        if (spec.weights.minCoeff() <= 0.0)
            fail(kv->second, "weights must be strictly positive (field: weights)");
    }

    {
        const auto* kv = get("speeds", "d", true);
        auto vals = parse_list(kv->first, kv->second, "d");
        if (static_cast<int>(vals.size()) != m)
            fail(kv->second, "expected " + std::to_string(m) + " values in 'd'");
        spec.speeds = Eigen::Map<Vector>(vals.data(), m);
        if (spec.speeds.array().abs().minCoeff() <= 0.0)
            fail(kv->second, "speed lower bound violated (field: d)");
    }

    spec.nonlinearity.c1 = Vector::Zero(m);
    spec.nonlinearity.c2 = Vector::Zero(m);
    for (auto [name, dst] : {std::pair{"c1", &spec.nonlinearity.c1},
                             std::pair{"c2", &spec.nonlinearity.c2}}) {
        if (const auto* kv = get("nonlinearity", name, false)) {
            auto vals = parse_list(kv->first, kv->second, name);
            if (static_cast<int>(vals.size()) != m)
                fail(kv->second, std::string("expected ") + std::to_string(m) +
                                     " values in '" + name + "'");
            *dst = Eigen::Map<Vector>(vals.data(), m);
        }
    }

    spec.initial_modes.assign(m, ModeProfile{});
    if (doc.count("initial")) {
        for (const auto& [key, kv] : doc.at("initial")) {
            if (key.rfind("mode", 0) != 0)
                fail(kv.second, "unknown key '" + key + "' in [initial]");
            int idx = -1;
            try {
                idx = std::stoi(key.substr(4));
            } catch (const std::exception&) {
                fail(kv.second, "malformed mode index in '" + key + "'");
            }
            if (idx < 0 || idx >= m)
                fail(kv.second, "mode index out of range in '" + key + "' (m = " +
                                    std::to_string(m) + ")");
            ModeProfile prof;
            std::stringstream ss(kv.first);
            std::string triple;
            int bump_no = 0;
            while (std::getline(ss, triple, ';')) {
                ++bump_no;
                triple = trim(triple);
                if (triple.empty()) continue;
                auto vals = parse_list(triple, kv.second, key);
                if (vals.size() != 3)
                    fail(kv.second, "bump " + std::to_string(bump_no) + " of '" + key +
                                        "' needs 3 values (A, beta, z0)");
                GaussianBump b{vals[0], vals[1], vals[2]};
                if (!(b.beta > 0.0))
                    fail(kv.second, "initial data not Gaussian-decaying (field: " + key +
                                        ", bump " + std::to_string(bump_no) + ")");
                if (b.amplitude != 0.0) prof.bumps.push_back(b);
            }
            spec.initial_modes[idx] = std::move(prof);
        }
    }

    {
        const auto* kv = get("run", "T", true);
        spec.horizon = parse_real(kv->first, kv->second, "T");
        if (!(spec.horizon > 0.0)) fail(kv->second, "T must be positive (field: T)");
    }

    if (!spec.relaxation.allFinite())
        throw ConfigError("operator entries must be finite");
    return spec;
}

ProblemSpec load_problem_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open problem document '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return load_problem(ss.str());
}

std::string serialize_problem(const ProblemSpec& spec) {
    std::ostringstream out;
    out << "[operator]\n";
    out << "m = " << spec.m << "\n";
    for (int i = 0; i < spec.m; ++i) {
        out << "row" << i << " =";
        for (int j = 0; j < spec.m; ++j)
            out << (j ? ", " : " ") << format_double(spec.relaxation(i, j));
        out << "\n";
    }
    out << "weights =";
    for (int j = 0; j < spec.m; ++j)
        out << (j ? ", " : " ") << format_double(spec.weights[j]);
    out << "\n\n[speeds]\nd =";
    for (int j = 0; j < spec.m; ++j)
        out << (j ? ", " : " ") << format_double(spec.speeds[j]);
    out << "\n\n[nonlinearity]\nc1 =";
    for (int j = 0; j < spec.m; ++j)
        out << (j ? ", " : " ") << format_double(spec.nonlinearity.c1[j]);
    out << "\nc2 =";
    for (int j = 0; j < spec.m; ++j)
        out << (j ? ", " : " ") << format_double(spec.nonlinearity.c2[j]);
    out << "\n\n[initial]\n";
    for (int i = 0; i < spec.m; ++i) {
        const auto& prof = spec.initial_modes[i];
        if (prof.is_zero()) continue;
        out << "mode" << i << " = ";
        for (size_t b = 0; b < prof.bumps.size(); ++b) {
            const auto& g = prof.bumps[b];
            if (b) out << " ; ";
            out << format_double(g.amplitude) << ", " << format_double(g.beta) << ", "
                << format_double(g.center);
        }
        out << "\n";
    }
    out << "\n[run]\nT = " << format_double(spec.horizon) << "\n";
    return out.str();
}

DecayCertificate validate_initial_decay(const ProblemSpec& spec) {
    DecayCertificate cert;
    cert.beta_min = std::numeric_limits<double>::infinity();
    bool any = false;
    for (const auto& prof : spec.initial_modes) {
        for (const auto& b : prof.bumps) {
            if (!(b.beta > 0.0))
                throw ConfigError("initial data not Gaussian-decaying");
            cert.envelope += std::abs(b.amplitude);
            cert.beta_min = std::min(cert.beta_min, b.beta);
            any = true;
        }
    }
    if (!any) cert.envelope = 0.0; // beta_min stays +inf as the sentinel
    return cert;
}

double GridField::dx() const {
    return x.size() > 1 ? x[1] - x[0] : 0.0;
}

GridField GridField::create(Vector x, Matrix values) {
    if (x.size() != values.rows())
        throw NumericsError("grid field: node count mismatch");
    if (x.size() >= 2) {
        const double d = x[1] - x[0];
        if (!(d > 0.0)) throw NumericsError("grid field: spacing must be positive");
        for (int i = 2; i < x.size(); ++i)
            if (std::abs((x[i] - x[i - 1]) - d) > 1e-9 * std::max(1.0, std::abs(d)))
                throw NumericsError("grid field: grid must be uniform");
    }
    if (!values.allFinite())
        throw NumericsError("grid field: non-finite entries");
    GridField f;
    f.x = std::move(x);
    f.values = std::move(values);
    return f;
}

GridField sample_initial(const ProblemSpec& spec, const SpectralData& sd,
                         const Vector& xi_grid) {
    if (static_cast<int>(spec.initial_modes.size()) > sd.size())
        throw NumericsError("mode-count mismatch between initial modes and spectral data");
    Matrix vals = Matrix::Zero(xi_grid.size(), spec.m);
    for (int k = 0; k < static_cast<int>(spec.initial_modes.size()); ++k) {
        const auto& prof = spec.initial_modes[k];
        if (prof.is_zero()) continue;
        const Vector h = sd.real_mode(k); // throws if mode k is not real
        for (int i = 0; i < xi_grid.size(); ++i)
            vals.row(i) += prof.eval(xi_grid[i]) * h.transpose();
    }
    return GridField::create(xi_grid, std::move(vals));
}

double domain_half_width(const ProblemSpec& spec) {
    const DecayCertificate cert = validate_initial_decay(spec);
    const double margin =
        std::isfinite(cert.beta_min) ? 6.0 / std::sqrt(cert.beta_min) : 1.0;
    double center = 0.0;
    for (const auto& prof : spec.initial_modes)
        for (const auto& b : prof.bumps) center = std::max(center, std::abs(b.center));
    const double dmax = spec.speeds.array().abs().maxCoeff();
    return std::max(margin, center + dmax * spec.horizon + margin);
}

Vector linspace(double lo, double hi, int n) {
    if (n < 2) throw NumericsError("linspace needs at least 2 nodes");
    Vector v(n);
    const double d = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) v[i] = lo + i * d;
    return v;
}

// ---------------------------------------------------------------------------
// shared interpolation kernels (declared in common.hpp)

namespace {
inline int cell_index(int n, double x0, double dx, double x, const char* what) {
    const double s = (x - x0) / dx;
    int i = static_cast<int>(std::floor(s));
    if (s < -1e-9 || s > n - 1 + 1e-9)
        throw GridError(std::string(what) + ": query outside grid");
    return std::clamp(i, 0, n - 2);
}
} // namespace

double cubic_interp(const double* v, int n, double x0, double dx, double x) {
    if (n < 2) throw GridError("cubic interpolation: grid too small");
    if (n < 4) return linear_interp(v, n, x0, dx, x);
    const int i = cell_index(n, x0, dx, x, "cubic interpolation");
    const int j = std::clamp(i - 1, 0, n - 4); // 4-point stencil j..j+3
    const double t = (x - (x0 + j * dx)) / dx; // in [~0,3]
    double w[4];
    w[0] = -(t - 1) * (t - 2) * (t - 3) / 6.0;
    w[1] = t * (t - 2) * (t - 3) / 2.0;
    w[2] = -t * (t - 1) * (t - 3) / 2.0;
    w[3] = t * (t - 1) * (t - 2) / 6.0;
    return w[0] * v[j] + w[1] * v[j + 1] + w[2] * v[j + 2] + w[3] * v[j + 3];
}

double cubic_interp_clamped(const double* v, int n, double x0, double dx, double x) {
    const double raw = cubic_interp(v, n, x0, dx, x);
    const int i = cell_index(n, x0, dx, x, "cubic interpolation");
    const double lo = std::min(v[i], v[i + 1]);
    const double hi = std::max(v[i], v[i + 1]);
    return std::clamp(raw, lo, hi);
}

double linear_interp(const double* v, int n, double x0, double dx, double x) {
    if (n < 2) throw GridError("linear interpolation: grid too small");
    const int i = cell_index(n, x0, dx, x, "linear interpolation");
    const double t = (x - (x0 + i * dx)) / dx;
    return (1.0 - t) * v[i] + t * v[i + 1];
}

} // namespace surge

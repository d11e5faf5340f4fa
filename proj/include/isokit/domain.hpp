#pragma once

#include <array>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"

namespace isokit {

enum class SpaceKind { interval, cube, gaussian, mu_r_alpha, restricted, explicit_points };

inline std::string to_string(SpaceKind k) {
    switch (k) {
        case SpaceKind::interval: return "interval";
        case SpaceKind::cube: return "cube";
        case SpaceKind::gaussian: return "gaussian";
        case SpaceKind::mu_r_alpha: return "mu_r_alpha";
        case SpaceKind::restricted: return "restricted";
        case SpaceKind::explicit_points: return "explicit";
    }
    return "?";
}

inline SpaceKind space_kind_from_string(const std::string& s) {
    if (s == "interval") return SpaceKind::interval;
    if (s == "cube") return SpaceKind::cube;
    if (s == "gaussian") return SpaceKind::gaussian;
    if (s == "mu_r_alpha") return SpaceKind::mu_r_alpha;
    if (s == "restricted") return SpaceKind::restricted;
    if (s == "explicit") return SpaceKind::explicit_points;
    throw std::invalid_argument("unsupported space kind: " + s);
}

using Point = std::array<double, 3>;
using GridFunction = std::vector<double>;
using SubsetMask = std::vector<bool>;

struct Edge {
    std::size_t a, b;
    double dist;
};

struct DiscreteSpace {
    std::vector<Point> points;
    std::vector<double> measures;
    std::vector<Edge> neighbors;  // each undirected edge once, a < b
    double total_measure = 0.0;
    SpaceKind kind = SpaceKind::explicit_points;
    int dim = 1;
    std::map<std::string, double> params;

    std::size_t size() const { return points.size(); }

    // CSR adjacency built from `neighbors`
    std::vector<std::size_t> adj_start;
    std::vector<std::pair<std::size_t, double>> adj;

    void finalize() {
        std::size_t n = points.size();
        adj_start.assign(n + 1, 0);
        for (const Edge& e : neighbors) {
            ++adj_start[e.a + 1];
            ++adj_start[e.b + 1];
        }
        for (std::size_t i = 0; i < n; ++i) adj_start[i + 1] += adj_start[i];
        adj.assign(adj_start[n], {0, 0.0});
        std::vector<std::size_t> fill(adj_start.begin(), adj_start.end() - 1);
        for (const Edge& e : neighbors) {
            adj[fill[e.a]++] = {e.b, e.dist};
            adj[fill[e.b]++] = {e.a, e.dist};
        }
        double s = 0.0;
        for (double m : measures) s += m;
        total_measure = s;
    }

    double spacing() const {
        auto it = params.find("spacing");
        if (it != params.end()) return it->second;
        double h = kInf;
        for (const Edge& e : neighbors) h = std::min(h, e.dist);
        return h;
    }

    double param(const std::string& k, double dflt) const {
        auto it = params.find(k);
        return it == params.end() ? dflt : it->second;
    }

    // Structured grids keep per-axis resolution; restricted spaces lose it.
    bool structured() const {
        return kind == SpaceKind::interval || kind == SpaceKind::cube ||
               kind == SpaceKind::gaussian || kind == SpaceKind::mu_r_alpha;
    }
    int resolution() const { return int(param("resolution", 0)); }

    double measure_of(const SubsetMask& A) const {
        double s = 0.0;
        for (std::size_t i = 0; i < A.size(); ++i)
            if (A[i]) s += measures[i];
        return s;
    }
};

namespace detail {

// 1D density exp(-|x|^r (log(gamma+|x|))^alpha), unnormalized
inline double mu_density(double x, double r, double alpha) {
    double ax = std::abs(x);
    if (alpha == 0.0) return std::exp(-std::pow(ax, r));
    double gamma = std::exp(2.0 * alpha / (2.0 - r));
    return std::exp(-std::pow(ax, r) * std::pow(std::log(gamma + ax), alpha));
}

inline double mu_normalizer(double r, double alpha) {
    // integral over the real line, composite Gauss on [0, X] with X where the
    // integrand is below 1e-40
    double X = 1.0;
    while (mu_density(X, r, alpha) > 1e-40) X *= 1.5;
    const int panels = 4000;
    auto dens = [&](double x) { return mu_density(x, r, alpha); };
    double h = X / panels;
    double s = integrate_endpoint_singular(dens, 0.0, h);
    for (int k = 1; k < panels; ++k) s += gauss_integrate(dens, k * h, (k + 1) * h, 16);
    return 2.0 * s;
}

inline double gauss_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace detail

inline DiscreteSpace build_space(SpaceKind kind, int dim, int resolution,
                                 const std::map<std::string, double>& params = {}) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("build_space: dim must be in 1..3");
    if (resolution < 2) throw std::invalid_argument("build_space: resolution must be >= 2");
    if (kind == SpaceKind::interval && dim != 1)
        throw std::invalid_argument("build_space: interval requires dim 1");
    if (kind == SpaceKind::restricted || kind == SpaceKind::explicit_points)
        throw std::invalid_argument("build_space: unsupported kind " + to_string(kind));

    DiscreteSpace S;
    S.kind = kind;
    S.dim = dim;
    S.params = params;
    S.params["dim"] = dim;
    S.params["resolution"] = resolution;

    // per-axis cell centres and cell masses
    std::vector<double> centre(resolution), mass(resolution);
    double h = 0.0;
    if (kind == SpaceKind::interval || kind == SpaceKind::cube) {
        h = 1.0 / resolution;
        for (int i = 0; i < resolution; ++i) {
            centre[i] = (i + 0.5) * h;
            mass[i] = h;
        }
        S.params["lo"] = 0.0;
    } else {
        auto itR = params.find("truncation_radius");
        if (itR == params.end() || itR->second < 4.0)
            throw std::invalid_argument("build_space: truncation_radius >= 4 required");
        double R = itR->second;
        double r = 2.0, alpha = 0.0;
        if (kind == SpaceKind::mu_r_alpha) {
            r = params.count("r") ? params.at("r") : 2.0;
            alpha = params.count("alpha") ? params.at("alpha") : 0.0;
            if (!(r >= 1.0 && r <= 2.0)) throw std::invalid_argument("build_space: r outside [1,2]");
            if (alpha < 0.0) throw std::invalid_argument("build_space: alpha must be >= 0");
            if (r == 2.0 && alpha != 0.0)
                throw std::invalid_argument("build_space: alpha must be 0 when r = 2");
            S.params["r"] = r;
            S.params["alpha"] = alpha;
        }
        h = 2.0 * R / resolution;
        std::function<double(double)> dens;
        double Z;
        if (kind == SpaceKind::gaussian) {
            const double c = 1.0 / std::sqrt(2.0 * std::acos(-1.0));
            dens = [c](double x) { return c * std::exp(-0.5 * x * x); };
            Z = 1.0;
        } else {
            dens = [r, alpha](double x) { return detail::mu_density(x, r, alpha); };
            Z = detail::mu_normalizer(r, alpha);
        }
        // the density is not smooth at the origin when r < 2: cells touching
        // it are integrated with geometric refinement
        auto cell_mass = [&](double a, double b) {
            if (kind == SpaceKind::gaussian) return gauss_integrate(dens, a, b, 5);
            if (a < 0.0 && b > 0.0)
                return integrate_endpoint_singular(dens, a, 0.0) + integrate_endpoint_singular(dens, 0.0, b);
            if (a == 0.0 || b == 0.0 || std::abs(a) < 1e-12 || std::abs(b) < 1e-12)
                return integrate_endpoint_singular(dens, a, b);
            return gauss_integrate(dens, a, b, 5);
        };
        double sum = 0.0;
        for (int i = 0; i < resolution; ++i) {
            double a = -R + i * h;
            if (2 * i == resolution) a = 0.0;
            double b = (2 * (i + 1) == resolution) ? 0.0 : -R + (i + 1) * h;
            centre[i] = a + 0.5 * h;
            mass[i] = cell_mass(a, b) / Z;
            sum += mass[i];
        }
        // The truncated tail is dropped. When it is not negligible the
        // measure is conditioned on the box instead.
        double axis_total = sum;
        double full = std::pow(axis_total, dim);
        if (full < 1.0 - 1e-6) {
            for (double& m : mass) m /= axis_total;
            S.params["renormalized"] = 1.0;
        }
        S.params["normalizer"] = Z;
        S.params["lo"] = -R;
    }
    S.params["spacing"] = h;

    std::size_t n = 1;
    for (int d = 0; d < dim; ++d) n *= resolution;
    S.points.resize(n);
    S.measures.resize(n);
    for (std::size_t idx = 0; idx < n; ++idx) {
        std::size_t rem = idx;
        Point p{0.0, 0.0, 0.0};
        double m = 1.0;
        for (int d = 0; d < dim; ++d) {
            int i = int(rem % resolution);
            rem /= resolution;
            p[d] = centre[i];
            m *= mass[i];
        }
        S.points[idx] = p;
        S.measures[idx] = m;
    }
    std::size_t stride = 1;
    for (int d = 0; d < dim; ++d) {
        for (std::size_t idx = 0; idx < n; ++idx) {
            int i = int((idx / stride) % resolution);
            if (i + 1 < resolution) S.neighbors.push_back({idx, idx + stride, h});
        }
        stride *= resolution;
    }
    std::sort(S.neighbors.begin(), S.neighbors.end(),
              [](const Edge& x, const Edge& y) { return x.a != y.a ? x.a < y.a : x.b < y.b; });
    S.finalize();
    return S;
}

inline DiscreteSpace build_space(const std::string& kind, int dim, int resolution,
                                 const std::map<std::string, double>& params = {}) {
    return build_space(space_kind_from_string(kind), dim, resolution, params);
}

inline DiscreteSpace restrict_space(const DiscreteSpace& S, const SubsetMask& G) {
    if (G.size() != S.size()) throw std::invalid_argument("restrict: mask length mismatch");
    std::vector<std::size_t> remap(S.size(), std::size_t(-1));
    DiscreteSpace R;
    for (std::size_t i = 0; i < S.size(); ++i) {
        if (!G[i]) continue;
        remap[i] = R.points.size();
        R.points.push_back(S.points[i]);
        R.measures.push_back(S.measures[i]);
    }
    if (R.points.empty()) throw std::invalid_argument("restrict: empty subset");
    for (const Edge& e : S.neighbors)
        if (G[e.a] && G[e.b]) R.neighbors.push_back({remap[e.a], remap[e.b], e.dist});
    R.kind = SpaceKind::restricted;
    R.dim = S.dim;
    R.params = S.params;
    R.params["spacing"] = S.spacing();
    R.params.erase("resolution");
    R.finalize();
    return R;
}

inline GridFunction gradient_modulus(const DiscreteSpace& S, const GridFunction& f) {
    if (f.size() != S.size()) throw std::invalid_argument("gradient_modulus: length mismatch");
    GridFunction g(S.size(), 0.0);
    for (std::size_t i = 0; i < S.size(); ++i) {
        double m = 0.0;
        for (std::size_t k = S.adj_start[i]; k < S.adj_start[i + 1]; ++k) {
            auto [j, d] = S.adj[k];
            m = std::max(m, std::abs(f[i] - f[j]) / d);
        }
        g[i] = m;
    }
    return g;
}

// (mu(A_h) - mu(A))/h with A_h the one-ring dilation of A inside S
inline double perimeter(const DiscreteSpace& S, const SubsetMask& A) {
    if (A.size() != S.size()) throw std::invalid_argument("perimeter: mask length mismatch");
    double h = S.spacing();
    if (!std::isfinite(h)) return 0.0;
    double added = 0.0;
    for (std::size_t i = 0; i < S.size(); ++i) {
        if (A[i]) continue;
        for (std::size_t k = S.adj_start[i]; k < S.adj_start[i + 1]; ++k) {
            if (A[S.adj[k].first]) {
                added += S.measures[i];
                break;
            }
        }
    }
    return added / h;
}

inline SubsetMask level_set(const GridFunction& f, double c) {
    SubsetMask A(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) A[i] = f[i] > c;
    return A;
}

// ---- serialization -------------------------------------------------------

inline nlohmann::json to_json(const DiscreteSpace& S) {
    using nlohmann::json;
    json j;
    j["kind"] = to_string(S.kind);
    j["dim"] = S.dim;
    j["resolution"] = S.param("resolution", 0.0);
    j["params"] = S.params;
    json pts = json::array();
    for (const Point& p : S.points) {
        json a = json::array();
        for (int d = 0; d < S.dim; ++d) a.push_back(p[d]);
        pts.push_back(a);
    }
    j["points"] = pts;
    j["measures"] = S.measures;
    json nb = json::array();
    for (const Edge& e : S.neighbors) nb.push_back(json::array({e.a, e.b, e.dist}));
    j["neighbors"] = nb;
    j["total_measure"] = S.total_measure;
    return j;
}

inline DiscreteSpace space_from_json(const nlohmann::json& j, const std::string& path = "<json>") {
    DiscreteSpace S;
    try {
        S.kind = space_kind_from_string(j.at("kind").get<std::string>());
        S.dim = j.at("dim").get<int>();
        if (j.contains("params")) S.params = j.at("params").get<std::map<std::string, double>>();
        for (const auto& p : j.at("points")) {
            Point q{0.0, 0.0, 0.0};
            if (int(p.size()) != S.dim) throw input_error(path, 1, "point dimension mismatch");
            for (int d = 0; d < S.dim; ++d) q[d] = p[d].get<double>();
            S.points.push_back(q);
        }
        S.measures = j.at("measures").get<std::vector<double>>();
        for (const auto& e : j.at("neighbors")) {
            std::size_t a = e.at(0).get<std::size_t>(), b = e.at(1).get<std::size_t>();
            double d = e.at(2).get<double>();
            if (a >= S.points.size() || b >= S.points.size() || !(d > 0.0))
                throw input_error(path, 1, "invalid neighbor entry");
            if (a > b) std::swap(a, b);
            S.neighbors.push_back({a, b, d});
        }
    } catch (const nlohmann::json::exception& e) {
        throw input_error(path, 1, std::string("malformed space: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw input_error(path, 1, e.what());
    }
    if (S.measures.size() != S.points.size()) throw input_error(path, 1, "measures/points length mismatch");
    S.finalize();
    return S;
}

inline std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error(path, 0, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void save_space(const DiscreteSpace& S, const std::string& path) {
    write_text(path, to_json(S).dump(1) + "\n");
}

inline DiscreteSpace load_space(const std::string& path) {
    std::string text = read_text(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // byte offset -> line number
        long line = 1;
        for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
            if (text[i] == '\n') ++line;
        throw input_error(path, line, "JSON parse error");
    }
    return space_from_json(j, path);
}

// CSV one value per line, or a JSON array
inline GridFunction load_function(const std::string& path) {
    std::string text = read_text(path);
    GridFunction f;
    std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        try {
            f = nlohmann::json::parse(text).get<std::vector<double>>();
        } catch (const nlohmann::json::exception&) {
            throw input_error(path, 1, "expected a JSON array of numbers");
        }
    } else {
        std::istringstream in(text);
        std::string line;
        long ln = 0;
        while (std::getline(in, line)) {
            ++ln;
            std::size_t a = line.find_first_not_of(" \t\r");
            if (a == std::string::npos || line[a] == '#') continue;
            std::size_t b = line.find_last_not_of(" \t\r,");
            std::string tok = line.substr(a, b - a + 1);
            char* end = nullptr;
            double v = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0') throw input_error(path, ln, "not a number: '" + tok + "'");
            f.push_back(v);
        }
    }
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!std::isfinite(f[i])) throw input_error(path, long(i) + 1, "non-finite value");
    return f;
}

inline void save_function(const GridFunction& f, const std::string& path) {
    std::string out;
    for (double v : f) out += format_double(v) + "\n";
    write_text(path, out);
}

}  // namespace isokit

namespace isokit {

// Integer lattice coordinates of the points of a grid-derived space.
struct Lattice {
    int dim = 1;
    std::array<long, 3> extent{1, 1, 1};
    double h = 0.0;
    std::vector<long> site;      // point -> site
    std::vector<long> point_at;  // site -> point or -1

    long index(const std::array<long, 3>& c) const { return c[0] + extent[0] * (c[1] + extent[1] * c[2]); }
    std::array<long, 3> coords(long s) const {
        return {s % extent[0], (s / extent[0]) % extent[1], s / (extent[0] * extent[1])};
    }
    std::size_t sites() const { return std::size_t(extent[0] * extent[1] * extent[2]); }
};

inline bool lattice_view(const DiscreteSpace& S, Lattice& L) {
    double h = S.spacing();
    if (!(h > 0.0) || !std::isfinite(h) || S.size() == 0) return false;
    L.dim = S.dim;
    L.h = h;
    std::array<double, 3> lo{kInf, kInf, kInf};
    for (const Point& p : S.points)
        for (int d = 0; d < S.dim; ++d) lo[d] = std::min(lo[d], p[d]);
    std::vector<std::array<long, 3>> c(S.size());
    L.extent = {1, 1, 1};
    for (std::size_t i = 0; i < S.size(); ++i) {
        c[i] = {0, 0, 0};
        for (int d = 0; d < S.dim; ++d) {
            double u = (S.points[i][d] - lo[d]) / h;
            long k = std::lround(u);
            if (std::abs(u - k) > 1e-6) return false;
            c[i][d] = k;
            L.extent[d] = std::max(L.extent[d], k + 1);
        }
    }
    L.site.resize(S.size());
    L.point_at.assign(L.sites(), -1);
    for (std::size_t i = 0; i < S.size(); ++i) {
        long s = L.index(c[i]);
        if (L.point_at[s] != -1) return false;
        L.site[i] = s;
        L.point_at[s] = long(i);
    }
    return true;
}

}  // namespace isokit

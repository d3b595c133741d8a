#include "sparselift/signal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "sparselift/rng.hpp"

namespace sparselift {

namespace {
constexpr std::uint64_t kTagSupport = 0x5350u; // stream tags
constexpr std::uint64_t kTagValues = 0x56414cu;
} // namespace

std::vector<double> SignalSpec::dense() const {
    std::vector<double> x(n, 0.0);
    for (int i = 0; i < k; ++i) x[support[i]] = values[i];
    return x;
}

SignalSpec gen_signal(int n, int k, SignalModel model, double w, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_signal: n must be >= 1");
    if (k < 1 || k > n) throw std::invalid_argument("gen_signal: need 1 <= k <= n");
    if (model == SignalModel::CoherenceW && !(w > 0.0 && w < 1.0))
        throw std::invalid_argument("gen_signal: coherence weight w must lie in (0,1)");

    SignalSpec s;
    s.n = n;
    s.k = k;
    s.model = model;
    s.w = (model == SignalModel::CoherenceW) ? w : 0.0;
    s.seed = seed;

    // support: partial Fisher-Yates over 0..n-1
    rng::Stream sup(rng::derive(seed, kTagSupport));
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    for (int i = 0; i < k; ++i) {
        int j = i + static_cast<int>(sup.next_below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[i], pool[j]);
    }
    s.support.assign(pool.begin(), pool.begin() + k);
    std::sort(s.support.begin(), s.support.end());

    s.values.resize(k);
    if (model == SignalModel::UniformSphere) {
        rng::Stream val(rng::derive(seed, kTagValues));
        double nrm2 = 0.0;
        for (int i = 0; i < k; ++i) {
            s.values[i] = val.next_normal();
            nrm2 += s.values[i] * s.values[i];
        }
        double inv = 1.0 / std::sqrt(nrm2);
        for (double& v : s.values) v *= inv;
    } else {
        double denom = std::sqrt(w * w + (1.0 - w) * (1.0 - w) * (k - 1));
        for (int i = 0; i < k; ++i) s.values[i] = (1.0 - w) / denom;
        s.values[0] = w / denom;
    }
    return s;
}

std::pair<double, double> coherence(const SignalSpec& x) {
    double linf = 0.0, l2 = 0.0;
    for (double v : x.values) {
        linf = std::max(linf, std::abs(v));
        l2 += v * v;
    }
    double mu0 = linf / std::sqrt(l2);
    return {mu0, std::sqrt(static_cast<double>(x.k)) * mu0};
}

SymMatrix lift(const SignalSpec& x) {
    int d = x.n + 1;
    std::vector<double> xl(d, 0.0);
    xl[0] = 1.0;
    for (int i = 0; i < x.k; ++i) xl[x.support[i] + 1] = x.values[i];
    SymMatrix m(d);
    double* a = m.data();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a[SymMatrix::idx(d, i, j)] = xl[i] * xl[j];
    return m;
}

SupportGeometry geometry(const SignalSpec& x) {
    SupportGeometry g;
    g.n = x.n;
    g.lifted_support.push_back(0);
    for (int s : x.support) g.lifted_support.push_back(s + 1);

    for (int i : g.lifted_support)
        for (int j : g.lifted_support) g.omega.emplace_back(i, j);

    for (int s : x.support) {
        g.omega_prime.emplace_back(0, s + 1);
        g.omega_prime.emplace_back(s + 1, 0);
    }

    std::vector<char> on(x.n + 1, 0);
    for (int j : g.lifted_support) on[j] = 1;
    for (int j = 1; j <= x.n; ++j)
        if (!on[j]) g.b_diag.emplace_back(j, j);

    g.x0_lifted.assign(x.n + 1, 0.0);
    g.x0_lifted[0] = 1.0;
    for (int i = 0; i < x.k; ++i) g.x0_lifted[x.support[i] + 1] = x.values[i];
    return g;
}

namespace {

std::vector<double> unit_lifted(const SignalSpec& x) {
    std::vector<double> u(x.n + 1, 0.0);
    u[0] = 1.0;
    for (int i = 0; i < x.k; ++i) u[x.support[i] + 1] = x.values[i];
    double inv = 1.0 / std::sqrt(2.0); // ||[1,x]||^2 = 2 for unit x
    for (double& v : u) v *= inv;
    return u;
}

} // namespace

std::vector<SymMatrix> tcap_omega_basis(const SignalSpec& x) {
    int d = x.n + 1;
    std::vector<double> u = unit_lifted(x);
    std::vector<int> idx{0};
    for (int s : x.support) idx.push_back(s + 1);

    std::vector<SymMatrix> basis;
    for (int j : idx) {
        SymMatrix g(d);
        for (int i = 0; i < d; ++i) {
            if (u[i] == 0.0) continue;
            g.add(i, j, u[i]);
        }
        for (const SymMatrix& b : basis) g.axpy(-frobenius_inner(g, b), b);
        double nv = frobenius_norm(g);
        if (nv > 1e-12) {
            g *= 1.0 / nv;
            basis.push_back(std::move(g));
        }
    }
    return basis;
}

SymMatrix project_T(const SymMatrix& h, const SignalSpec& x) {
    int d = x.n + 1;
    h.check_same_dim(SymMatrix(d));
    std::vector<double> u = unit_lifted(x);
    // P_T(h) = u u^T h + h u u^T - u u^T h u u^T, u unit
    std::vector<double> hu(d, 0.0);
    for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int j = 0; j < d; ++j) s += h(i, j) * u[j];
        hu[i] = s;
    }
    double uhu = 0.0;
    for (int i = 0; i < d; ++i) uhu += u[i] * hu[i];
    SymMatrix out(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
            out.set(i, j, u[i] * hu[j] + hu[i] * u[j] - uhu * u[i] * u[j]);
    return out;
}

SymMatrix project_Tperp(const SymMatrix& h, const SignalSpec& x) {
    SymMatrix out = h;
    out -= project_T(h, x);
    return out;
}

SymMatrix project_TcapOmega(const SymMatrix& h, const std::vector<SymMatrix>& basis) {
    if (basis.empty()) throw std::invalid_argument("project_TcapOmega: empty basis");
    SymMatrix out(h.dim());
    for (const SymMatrix& b : basis) out.axpy(frobenius_inner(h, b), b);
    return out;
}

SymMatrix project_TcapOmega(const SymMatrix& h, const SignalSpec& x) {
    return project_TcapOmega(h, tcap_omega_basis(x));
}

SymMatrix project_OmegaC(const SymMatrix& h, const SignalSpec& x) {
    int d = x.n + 1;
    h.check_same_dim(SymMatrix(d));
    std::vector<char> on(d, 0);
    on[0] = 1;
    for (int s : x.support) on[s + 1] = 1;
    SymMatrix out = h;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (on[i] && on[j]) out.set(i, j, 0.0);
    return out;
}

SymMatrix mask_to(const SymMatrix& h, const std::vector<std::pair<int, int>>& pairs) {
    SymMatrix out(h.dim());
    for (auto [i, j] : pairs) out.set(i, j, h(i, j));
    return out;
}

std::string SignalSpec::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["k"] = k;
    j["support"] = support;
    j["values"] = values;
    j["model"] = (model == SignalModel::UniformSphere) ? "uniform_sphere" : "coherence_w";
    if (model == SignalModel::CoherenceW) j["w"] = w;
    j["seed"] = seed;
    return j.dump();
}

SignalSpec SignalSpec::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    SignalSpec s;
    s.n = j.at("n").get<int>();
    s.k = j.at("k").get<int>();
    s.support = j.at("support").get<std::vector<int>>();
    s.values = j.at("values").get<std::vector<double>>();
    std::string m = j.at("model").get<std::string>();
    if (m == "uniform_sphere") {
        s.model = SignalModel::UniformSphere;
    } else if (m == "coherence_w") {
        s.model = SignalModel::CoherenceW;
        s.w = j.at("w").get<double>();
    } else {
        throw std::invalid_argument("SignalSpec: unknown model '" + m + "'");
    }
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
}

std::string SupportGeometry::to_json() const {
    nlohmann::json j;
    auto one_based = [](const std::vector<std::pair<int, int>>& ps) {
        std::vector<std::vector<int>> out;
        out.reserve(ps.size());
        for (auto [a, b] : ps) out.push_back({a + 1, b + 1});
        return out;
    };
    j["indexing"] = "1-based lifted; index 1 is the appended coordinate";
    std::vector<int> ls;
    for (int v : lifted_support) ls.push_back(v + 1);
    j["lifted_support"] = ls;
    j["omega"] = one_based(omega);
    j["omega_prime"] = one_based(omega_prime);
    j["b_diag"] = one_based(b_diag);
    j["x0_lifted"] = x0_lifted;
    return j.dump();
}

} // namespace sparselift

#include "confine/evolution.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <stdexcept>
#include <string>

namespace confine {

namespace {

const cplx I(0.0, 1.0);

double edge_distance(const Interval& iv, double x) { return std::min(x - iv.a, iv.b - x); }

}  // namespace

const char* to_string(BoundaryVariant b) {
    switch (b) {
        case BoundaryVariant::Reflecting: return "reflecting";
        case BoundaryVariant::PhaseShifted: return "phase-shifted";
    }
    return "?";
}

DiscretizedFiber DiscretizedFiber::build(const RadialDiracProblem& p, const FiberGridOptions& opt) {
    p.validate();
    const Interval& iv = p.domain();
    if (iv.infinite_right()) throw std::invalid_argument("evolution needs a bounded interval");
    if (opt.n < 8) throw std::invalid_argument("need at least 8 grid nodes");
    if (!(opt.delta_cut > 0.0) || 2 * opt.delta_cut >= iv.length())
        throw std::invalid_argument("delta_cut must be positive and below half the interval");

    DiscretizedFiber f;
    f.domain = iv;
    f.delta_cut = opt.delta_cut;
    f.boundary = opt.boundary;
    int n = opt.n;
    double lo = iv.a + opt.delta_cut, hi = iv.b - opt.delta_cut;
    f.h = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) f.x_upper.push_back(lo + i * f.h);
    for (int i = 0; i + 1 < n; ++i) f.x_lower.push_back(lo + (i + 0.5) * f.h);

    const auto& pot = p.potential;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(5 * n);
    for (int i = 0; i < n; ++i) {
        double x = f.x_upper[i];
        double d = pot.v0.value(x, iv) + pot.v3.value(x, iv);
        if (i == 0 || i == n - 1) {
            if (opt.boundary == BoundaryVariant::PhaseShifted) d += opt.wall_phase / f.h;
        }
        if (!std::isfinite(d)) throw std::domain_error("potential is not finite at x = " + std::to_string(x));
        t.emplace_back(2 * i, 2 * i, d);
    }
    for (int i = 0; i + 1 < n; ++i) {
        double x = f.x_lower[i];
        double d = pot.v0.value(x, iv) - pot.v3.value(x, iv);
        double w = p.w(x);
        if (!std::isfinite(d) || !std::isfinite(w))
            throw std::domain_error("potential is not finite at x = " + std::to_string(x));
        int r = 2 * i + 1;
        t.emplace_back(r, r, d);
        // (B u) = (u_{i+1} - u_i)/h + w (u_i + u_{i+1})/2 and its transpose
        double left = -1.0 / f.h + 0.5 * w, right = 1.0 / f.h + 0.5 * w;
        t.emplace_back(r, 2 * i, left);
        t.emplace_back(2 * i, r, left);
        t.emplace_back(r, 2 * i + 2, right);
        t.emplace_back(2 * i + 2, r, right);
    }
    f.hamiltonian.resize(2 * n - 1, 2 * n - 1);
    f.hamiltonian.setFromTriplets(t.begin(), t.end());
    f.hamiltonian.makeCompressed();
    return f;
}

double DiscretizedFiber::hermiticity_defect() const {
    Eigen::SparseMatrix<double> diff = hamiltonian - Eigen::SparseMatrix<double>(hamiltonian.transpose());
    double scale = 0.0, dev = 0.0;
    for (int k = 0; k < hamiltonian.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(hamiltonian, k); it; ++it)
            scale = std::max(scale, std::fabs(it.value()));
    for (int k = 0; k < diff.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it)
            dev = std::max(dev, std::fabs(it.value()));
    return scale > 0.0 ? dev / scale : dev;
}

double DiscretizedFiber::norm(const Eigen::VectorXcd& psi) const {
    return std::sqrt(psi.squaredNorm() * h);
}

Eigen::VectorXcd DiscretizedFiber::gaussian_packet(std::optional<double> centre, double width) const {
    double c = centre.value_or(0.5 * (domain.a + domain.b));
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(size());
    for (std::size_t i = 0; i < x_upper.size(); ++i) {
        double z = (x_upper[i] - c) / width;
        psi[2 * i] = std::exp(-0.5 * z * z);
    }
    return psi / norm(psi);
}

double DiscretizedFiber::band_probability(const Eigen::VectorXcd& psi, double band) const {
    double p = 0.0;
    for (std::size_t i = 0; i < x_upper.size(); ++i)
        if (edge_distance(domain, x_upper[i]) < band) p += std::norm(psi[2 * i]);
    for (std::size_t i = 0; i < x_lower.size(); ++i)
        if (edge_distance(domain, x_lower[i]) < band) p += std::norm(psi[2 * i + 1]);
    return p * h;
}

double DiscretizedFiber::band_flux(const Eigen::VectorXcd& psi, double band) const {
    int n = static_cast<int>(x_upper.size());
    auto current = [&](double x) {
        int i = static_cast<int>(std::lround((x - x_upper.front()) / h));
        i = std::clamp(i, 1, n - 2);
        cplx u = psi[2 * i];
        cplx v = 0.5 * (psi[2 * i - 1] + psi[2 * i + 1]);
        return 2.0 * (std::conj(u) * v).imag();
    };
    return -current(domain.a + band) + current(domain.b - band);
}

double DiscretizedFiber::cut_amplitude(const Eigen::VectorXcd& psi) const {
    int m = size();
    double a = 0.0;
    for (int k = 0; k < std::min(8, m); ++k) {
        a = std::max(a, std::abs(psi[k]));
        a = std::max(a, std::abs(psi[m - 1 - k]));
    }
    return a;
}

namespace {

class CrankNicolson {
public:
    CrankNicolson(const DiscretizedFiber& f, double dt) {
        double defect = f.hermiticity_defect();
        if (defect > 1e-12)
            throw SymmetryViolation("discrete Hamiltonian is not Hermitian", defect);
        Eigen::SparseMatrix<cplx> hc = f.hamiltonian.cast<cplx>();
        Eigen::SparseMatrix<cplx> id(f.size(), f.size());
        id.setIdentity();
        half_ = (0.5 * dt) * I * hc;
        Eigen::SparseMatrix<cplx> lhs = id + half_;
        lu_.analyzePattern(lhs);
        lu_.factorize(lhs);
        if (lu_.info() != Eigen::Success) throw std::runtime_error("Crank-Nicolson factorisation failed");
    }

    void step(Eigen::VectorXcd& psi, long index) {
        Eigen::VectorXcd rhs = psi - half_ * psi;
        psi = lu_.solve(rhs);
        if (lu_.info() != Eigen::Success || !psi.allFinite())
            throw std::runtime_error("linear solve failed at step " + std::to_string(index));
    }

private:
    Eigen::SparseMatrix<cplx> half_;
    Eigen::SparseLU<Eigen::SparseMatrix<cplx>, Eigen::NaturalOrdering<int>> lu_;
};

void check_step(double t_end, double dt) {
    if (!(dt > 0.0) || dt > 1e-3) throw std::invalid_argument("time step must lie in (0, 1e-3]");
    if (!(t_end >= 0.0)) throw std::invalid_argument("final time must be non-negative");
}

long sample_stride(double interval, double dt) {
    return std::max<long>(1, std::lround(interval / dt));
}

}  // namespace

EvolutionRun crank_nicolson_evolve(const DiscretizedFiber& f, const Eigen::VectorXcd& psi0,
                                   double t_end, double dt, const EvolutionOptions& opt) {
    check_step(t_end, dt);
    if (psi0.size() != f.size()) throw std::invalid_argument("initial state has the wrong size");
    if (std::fabs(f.norm(psi0) - 1.0) > 1e-9) throw std::invalid_argument("initial state must have norm 1");
    if (f.band_probability(psi0, 0.1) > 1e-10)
        throw std::invalid_argument("initial state must be supported at distance > 0.1 from the boundary");

    CrankNicolson cn(f, dt);
    EvolutionRun run;
    auto& d = run.diagnostics;
    d.steps = std::lround(t_end / dt);
    long stride = sample_stride(opt.sample_interval, dt);
    Eigen::VectorXcd psi = psi0;
    auto sample = [&](long k, double nrm) {
        d.times.push_back(k * dt);
        d.norm.push_back(nrm);
        d.band_prob.push_back(f.band_probability(psi, opt.band));
        d.flux.push_back(f.band_flux(psi, opt.band));
        d.cut_amp.push_back(f.cut_amplitude(psi));
    };
    double n0 = f.norm(psi), prev = n0;
    sample(0, n0);
    for (long k = 1; k <= d.steps; ++k) {
        cn.step(psi, k);
        double nrm = f.norm(psi);
        d.max_step_drift = std::max(d.max_step_drift, std::fabs(nrm - prev));
        prev = nrm;
        if (k % stride == 0 || k == d.steps) sample(k, nrm);
    }
    d.total_drift = std::fabs(prev - n0);
    run.final_state = std::move(psi);
    return run;
}

void write_csv(std::ostream& os, const EvolutionDiagnostics& d) {
    os << "t,norm,band_prob,flux,cut_amp\n";
    os << std::setprecision(12);
    for (std::size_t i = 0; i < d.times.size(); ++i)
        os << d.times[i] << ',' << d.norm[i] << ',' << d.band_prob[i] << ',' << d.flux[i] << ','
           << d.cut_amp[i] << '\n';
}

ExtensionProbe extension_dependence_probe(const RadialDiracProblem& p, const ProbeOptions& opt) {
    check_step(opt.t_end, opt.dt);
    FiberGridOptions ga = opt.grid, gb = opt.grid;
    ga.boundary = BoundaryVariant::Reflecting;
    gb.boundary = BoundaryVariant::PhaseShifted;
    DiscretizedFiber fa = DiscretizedFiber::build(p, ga);
    DiscretizedFiber fb = DiscretizedFiber::build(p, gb);
    Eigen::VectorXcd a = fa.gaussian_packet(opt.centre, opt.width);
    if (fa.band_probability(a, 0.1) > 1e-10)
        throw std::invalid_argument("initial state must be supported at distance > 0.1 from the boundary");
    Eigen::VectorXcd b = a;
    CrankNicolson ca(fa, opt.dt), cb(fb, opt.dt);

    ExtensionProbe out;
    long steps = std::lround(opt.t_end / opt.dt);
    long stride = sample_stride(opt.sample_interval, opt.dt);
    auto sample = [&](long k) {
        double diff = fa.norm(a - b);
        out.times.push_back(k * opt.dt);
        out.difference.push_back(diff);
        out.divergence = std::max(out.divergence, diff);
        out.max_cut_amplitude =
            std::max({out.max_cut_amplitude, fa.cut_amplitude(a), fb.cut_amplitude(b)});
    };
    sample(0);
    for (long k = 1; k <= steps; ++k) {
        ca.step(a, k);
        cb.step(b, k);
        if (k % stride == 0 || k == steps) sample(k);
    }
    return out;
}

}  // namespace confine

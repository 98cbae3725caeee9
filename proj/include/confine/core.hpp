#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace confine {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using Point = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

class SymmetryViolation : public std::invalid_argument {
public:
    SymmetryViolation(const std::string& what, double deviation)
        : std::invalid_argument(what), deviation_(deviation) {}
    double deviation() const { return deviation_; }

private:
    double deviation_;
};

// Hermitian k x k matrix, k in {2, 4}. Construction refuses anything that is
// not exactly equal to its conjugate transpose.
class HermitianMatrix {
public:
    static HermitianMatrix from(const CMat& m);
    static HermitianMatrix identity(int k);
    static HermitianMatrix zero(int k);
    static HermitianMatrix sigma(int j);
    static HermitianMatrix alpha(int j);
    static HermitianMatrix beta();

    int dimension() const { return static_cast<int>(m_.rows()); }
    const CMat& matrix() const { return m_; }
    Eigen::VectorXd eigenvalues() const;

private:
    explicit HermitianMatrix(CMat m) : m_(std::move(m)) {}
    CMat m_;
};

struct PauliCoefficients {
    double v0 = 0, v1 = 0, v2 = 0, v3 = 0;
};

PauliCoefficients pauli_decompose(const HermitianMatrix& h);
CMat pauli_recompose(const PauliCoefficients& c);

// One-dimensional coefficient functions --------------------------------------

enum class Side { Left, Right };
const char* to_string(Side s);

// Open interval (a, b); b may be +infinity.
struct Interval {
    double a = 0.0;
    double b = 1.0;

    bool infinite_right() const;
    double length() const;
    double distance(double x) const;
    double distance_to(Side s, double x) const;
    double endpoint(Side s) const { return s == Side::Left ? a : b; }
    bool contains(double x) const { return x > a && x < b; }
};

// What is left of a coefficient once its c/delta part has been removed, near
// one endpoint. Ordered from tame to unknown.
enum class Remainder { Zero = 0, Bounded = 1, Integrable = 2, Unknown = 3 };

struct EndpointAsymptotics {
    double inverse_distance = 0.0;  // coefficient of 1/delta
    double strong_order = 0.0;      // > 1 when c/delta^order dominates
    double strong_coefficient = 0.0;
    Remainder remainder = Remainder::Zero;

    bool has_strong_term() const { return strong_order > 1.0 && strong_coefficient != 0.0; }
};

EndpointAsymptotics operator+(const EndpointAsymptotics& x, const EndpointAsymptotics& y);

enum class Family { Power, Logarithmic, Chernoff, Sine };
const char* to_string(Family f);

class Coefficient {
public:
    enum class Kind { Zero, Constant, PowerAtEndpoint, ClosedForm, Tabulated, Custom };

    using Fn = std::function<double(double)>;

    static Coefficient zero();
    static Coefficient constant(double c);
    // lambda / delta_side(x)^alpha; match_radius is the radius inside which the
    // power law is the declared behaviour.
    static Coefficient power_at_endpoint(double lambda, double alpha, Side side,
                                         double match_radius = 0.5);
    // Power:       {lambda_a, lambda_b, alpha}  lambda_a/(x-a)^alpha + lambda_b/(b-x)^alpha
    // Logarithmic: {c_a, c_b}                   c_a ln(x-a) + c_b ln(b-x)
    // Chernoff:    {alpha}                      (1 + x^2)^(alpha/2)
    // Sine:        {amplitude, omega, phase}    amplitude sin(omega x + phase)
    static Coefficient closed_form(Family f, std::vector<double> params);
    // Natural cubic spline through (grid, values), constant outside the grid.
    static Coefficient tabulated(std::vector<double> grid, std::vector<double> values);
    static Coefficient custom(std::string name, Fn fn, EndpointAsymptotics left,
                              EndpointAsymptotics right);

    Kind kind() const { return kind_; }
    bool is_zero() const { return kind_ == Kind::Zero; }
    double value(double x, const Interval& iv) const;
    EndpointAsymptotics asymptotics(Side s, const Interval& iv) const;
    std::string describe() const;

    // accessors used by serialisation
    const std::vector<double>& params() const { return params_; }
    Family family() const { return family_; }
    Side side() const { return side_; }

private:
    struct Spline;

    Kind kind_ = Kind::Zero;
    Family family_ = Family::Power;
    Side side_ = Side::Right;
    std::vector<double> params_;
    std::shared_ptr<const Spline> spline_;
    std::shared_ptr<const Fn> fn_;
    std::string name_;
    EndpointAsymptotics custom_left_, custom_right_;
};

struct PotentialSpec1D {
    Interval domain;
    Coefficient v0 = Coefficient::zero();
    Coefficient v1 = Coefficient::zero();
    Coefficient v2 = Coefficient::zero();
    Coefficient v3 = Coefficient::zero();

    PauliCoefficients at(double x) const;
    void validate() const;
};

struct GaugeRemoval {
    PotentialSpec1D potential;
    std::function<double(double)> phase;  // phi(x) = integral of v2 from the anchor
    double anchor = 0.0;
};

GaugeRemoval gauge_remove_v2(const PotentialSpec1D& p);

// d-dimensional geometry ------------------------------------------------------

class Domain {
public:
    enum class Kind { Interval, UnitBall, PuncturedUnitBall, Annulus, HalfLine };

    static Domain interval(double a, double b);
    static Domain unit_disk() { return unit_ball(2); }
    static Domain unit_ball(int dim);
    static Domain punctured_unit_disk();
    static Domain annulus(double r0);
    static Domain half_line(double a);

    Kind kind() const { return kind_; }
    int dimension() const { return dim_; }
    double distance(const Point& x) const;
    Point distance_gradient(const Point& x) const;
    bool contains(const Point& x) const;
    Interval as_interval() const;
    double inner_radius() const { return r0_; }
    std::string describe() const;

private:
    Kind kind_ = Kind::Interval;
    int dim_ = 1;
    double a_ = 0, b_ = 1, r0_ = 0;
};

// Real scalar field on R^d with gradient.
class ScalarField {
public:
    using Fn = std::function<double(const Point&)>;
    using Grad = std::function<Point(const Point&)>;

    ScalarField() = default;
    ScalarField(std::string name, Fn f, Grad g);
    // Central differences with step 1e-6 * delta(x).
    static ScalarField numeric(std::string name, Fn f, Domain domain);

    double operator()(const Point& x) const { return f_(x); }
    Point gradient(const Point& x) const { return g_(x); }
    const std::string& name() const { return name_; }
    bool valid() const { return static_cast<bool>(f_); }

private:
    std::string name_;
    Fn f_;
    Grad g_;
};

ScalarField constant_field(double c, int dim);
ScalarField linear_field(int axis, double slope, double offset, int dim);
// lambda / delta^alpha
ScalarField distance_power(const Domain& d, double lambda, double alpha);
// profile(delta) with its derivative; the gradient uses the chain rule.
ScalarField distance_profile(const Domain& d, std::string name, std::function<double(double)> f,
                             std::function<double(double)> df);
ScalarField log_distance(const Domain& d);

// Dirac operators A^j D_j + V(x) ----------------------------------------------

struct PotentialTerm {
    HermitianMatrix structure;
    ScalarField field;
};

class DiracCoefficients {
public:
    static DiracCoefficients pauli_1d();
    static DiracCoefficients pauli_2d();
    static DiracCoefficients dirac_3d();

    DiracCoefficients with_potential(std::vector<PotentialTerm> terms) const;

    int dimension() const { return static_cast<int>(kinetic_.size()); }
    int spinor_dimension() const { return kinetic_.front().dimension(); }
    const std::vector<HermitianMatrix>& kinetic() const { return kinetic_; }
    const std::vector<PotentialTerm>& terms() const { return terms_; }

    CMat potential(const Point& x) const;
    std::vector<CMat> potential_gradient(const Point& x) const;
    CMat symbol(const Point& xi) const;

    // The matrix a Lorentz scalar couples through: sigma_1 in 1D, sigma_3 in 2D, beta in 3D.
    HermitianMatrix scalar_structure() const;

private:
    std::vector<HermitianMatrix> kinetic_;
    std::vector<PotentialTerm> terms_;
};

struct ScalarCheck {
    bool scalar = false;
    double max_norm = 0.0;
};

ScalarCheck is_scalar_potential(const DiracCoefficients& c, const std::vector<Point>& samples);
Eigen::MatrixXd velocity_matrix(const DiracCoefficients& c, const Point& x);

// Spectral norm of a small complex matrix.
double operator_norm(const CMat& m);

}  // namespace confine

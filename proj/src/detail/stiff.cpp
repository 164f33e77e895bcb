#include "stiff.hpp"

#include <boost/numeric/odeint.hpp>

namespace fluidspan::detail {

std::size_t integrate_stiff(std::vector<double> y0, const StiffRhs& rhs, const StiffJacobian& jac,
                     const std::vector<double>& times, double dt0, double abs_tol, double rel_tol,
                     const StiffObserver& observe) {
  namespace odeint = boost::numeric::odeint;
  using Vec = boost::numeric::ublas::vector<double>;
  using Mat = boost::numeric::ublas::matrix<double>;
  const std::size_t n = y0.size();
  std::vector<double> a(n), b(n), J(n * n);

  auto f = [&](const Vec& y, Vec& dy, double) {
    std::copy(y.begin(), y.end(), a.begin());
    rhs(a, b);
    std::copy(b.begin(), b.end(), dy.begin());
  };
  auto jf = [&](const Vec& y, Mat& M, double, Vec& dfdt) {
    std::copy(y.begin(), y.end(), a.begin());
    jac(a, J);
    for (std::size_t i = 0; i < n; ++i) {
      dfdt[i] = 0.0;
      for (std::size_t k = 0; k < n; ++k) M(i, k) = J[i * n + k];
    }
  };
  Vec y(n);
  std::copy(y0.begin(), y0.end(), y.begin());
  auto stepper = odeint::make_dense_output(abs_tol, rel_tol, odeint::rosenbrock4<double>());
  std::vector<double> out(n);
  std::size_t seen = 0;
  struct Stop {};
  try {
    odeint::integrate_times(stepper, std::make_pair(f, jf), y, times.begin(), times.end(), dt0,
                            [&](const Vec& s, double t) {
                              std::copy(s.begin(), s.end(), out.begin());
                              ++seen;
                              if (!observe(out, t)) throw Stop{};
                            });
  } catch (const Stop&) {
  }
  return seen;
}

}  // namespace fluidspan::detail

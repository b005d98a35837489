#include "nelder_mead.hpp"

#include <memory>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

namespace sgl::detail {
namespace {

struct Closure {
  const std::function<double(const Eigen::VectorXd&)>* f;
  Eigen::VectorXd scratch;
};

double trampoline(const gsl_vector* v, void* params) {
  auto* c = static_cast<Closure*>(params);
  for (std::size_t i = 0; i < v->size; ++i) c->scratch[i] = gsl_vector_get(v, i);
  return (*c->f)(c->scratch);
}

struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};

}  // namespace

SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& start, double step, int max_iterations,
                          double size_tolerance) {
  const auto n = static_cast<std::size_t>(start.size());
  Closure closure{&f, Eigen::VectorXd(start.size())};
  gsl_multimin_function fn{&trampoline, n, &closure};

  std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(n));
  std::unique_ptr<gsl_vector, VectorDeleter> steps(gsl_vector_alloc(n));
  for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x.get(), i, start[i]);
  gsl_vector_set_all(steps.get(), step);

  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> m(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
  gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), steps.get());

  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), size_tolerance) == GSL_SUCCESS) break;
  }
  SimplexResult r;
  r.x.resize(start.size());
  for (std::size_t i = 0; i < n; ++i) r.x[i] = gsl_vector_get(m->x, i);
  r.value = m->fval;
  r.iterations = iter;
  return r;
}

}  // namespace sgl::detail

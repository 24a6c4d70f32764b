#include "cpfjd/minres.hpp"

#include <cmath>

namespace cpfjd {

Vector PencilOperator::apply(const Vector& z) const {
  const Vector az = spmv(pair->a, z);
  const Vector bz = spmv(pair->b, z);
  Vector out = spmv_transpose(pair->a, az);
  out.noalias() -= shift * spmv_transpose(pair->b, bz);
  return out;
}

Vector ProjectedOperator::project_left(const Vector& v) const {
  if (xp.cols() == 0) return v;
  return v - yp * (xp.transpose() * v);
}

Vector ProjectedOperator::project_right(const Vector& v) const {
  if (xp.cols() == 0) return v;
  return v - xp * (yp.transpose() * v);
}

Vector ProjectedOperator::apply(const Vector& z) const {
  return project_left(inner.apply(project_right(z)));
}

Vector apply_projected(const ProjectedOperator& op, const Vector& z) {
  if (z.size() != op.dim()) {
    throw InputError("apply_projected: vector length mismatch");
  }
  return op.apply(z);
}

namespace {

double true_relative_residual(const ProjectedOperator& op, const Vector& b,
                              const Vector& t, double b_norm) {
  if (b_norm == 0.0) return 0.0;
  return (b - op.apply(t)).norm() / b_norm;
}

}  // namespace

MinresResult minres_solve(const ProjectedOperator& op, const Vector& rhs,
                          double rel_tol, Index max_iters) {
  if (rhs.size() != op.dim()) {
    throw InputError("minres_solve: rhs length mismatch");
  }
  MinresResult res;
  res.t = Vector::Zero(rhs.size());

  // The operator maps into span(Xp)^perp, so a consistent right-hand
  // side must live there too; project once at entry.
  const Vector b = op.project_left(rhs);
  const double b_norm = b.norm();
  if (b_norm == 0.0) {
    res.converged = true;
    return res;
  }

  Vector x = Vector::Zero(b.size());
  Vector v = b / b_norm;
  Vector v_old = Vector::Zero(b.size());
  Vector d = Vector::Zero(b.size());
  Vector d_old = Vector::Zero(b.size());

  double beta = 0.0;      // subdiagonal entering the current column
  double phi_bar = b_norm;
  double c_prev = -1.0, s_prev = 0.0;    // rotation k-1
  double c_prev2 = -1.0, s_prev2 = 0.0;  // rotation k-2
  double last_checked = 2.0;             // last estimate verified from scratch

  for (Index it = 1; it <= max_iters; ++it) {
    res.iterations = it;

    Vector q = op.apply(v);
    const double apply_norm = q.norm();
    const double alpha = v.dot(q);
    q -= alpha * v;
    if (beta != 0.0) q -= beta * v_old;
    // Drift control: the Krylov basis lives in span(Xp)^perp, which the
    // oblique projectors only preserve up to rounding.
    q = op.project_left(q);
    const double beta_new = q.norm();
    const bool lanczos_exhausted = beta_new <= 1e-14 * apply_norm;

    // Plane rotations: fold the two previous ones into the new column,
    // then generate the one that annihilates beta_new.
    const double eps_entry = s_prev2 * beta;
    const double delta_hat = -c_prev2 * beta;
    const double delta = c_prev * delta_hat + s_prev * alpha;
    const double gamma_hat = s_prev * delta_hat - c_prev * alpha;
    const double gamma = std::hypot(gamma_hat, beta_new);
    if (gamma == 0.0) {
      res.breakdown = true;
      break;
    }
    const double c = gamma_hat / gamma;
    const double s = beta_new / gamma;

    Vector d_new = (v - delta * d - eps_entry * d_old) / gamma;
    x += (c * phi_bar) * d_new;
    phi_bar *= s;

    d_old = std::move(d);
    d = std::move(d_new);
    v_old = v;
    if (!lanczos_exhausted) v = q / beta_new;
    beta = beta_new;
    c_prev2 = c_prev;
    s_prev2 = s_prev;
    c_prev = c;
    s_prev = s;

    const double estimate = std::abs(phi_bar) / b_norm;
    res.residual_history.push_back(estimate);

    if (lanczos_exhausted) {
      res.breakdown = true;
      break;
    }
    // The estimate tracks the true residual closely but can drift over
    // long runs; accept only a verified residual.
    if (estimate <= rel_tol && estimate <= 0.99 * last_checked) {
      last_checked = true_relative_residual(op, b, x, b_norm);
      if (last_checked <= rel_tol) break;
    }
  }

  res.t = op.project_right(x);
  res.rel_res = true_relative_residual(op, b, res.t, b_norm);
  res.converged = res.rel_res <= rel_tol || res.breakdown;
  res.hit_max_iters = !res.converged && res.iterations == max_iters;
  return res;
}

}  // namespace cpfjd

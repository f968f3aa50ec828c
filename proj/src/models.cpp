#include "xdiff/models.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace xdiff {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw InvalidParameter(msg);
}

// Shared validation harness for reaction evaluators: r_i must vanish on the
// face u_i = 0.
void probe_reaction_faces(int n, const ReactionEval& r) {
  const double probes[] = {0.04, 0.17, 0.31};
  for (int i = 0; i < n; ++i) {
    for (double fill : probes) {
      Vector u = Vector::Constant(n, fill);
      u[i] = 0.0;
      const Vector rv = r(Composition(u));
      if (std::abs(rv[i]) > 1e-14)
        throw InvalidReaction("reaction does not vanish where its fraction vanishes");
    }
  }
}

}  // namespace

// ---- scalar -----------------------------------------------------------------

ModelSpec scalar_model(double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "scalar model: alpha must lie in [0, 1]");
  ModelSpec m;
  m.name = "scalar";
  m.n = 1;
  m.s = 0.5 * (alpha + 1.0);
  m.params = {{"alpha", alpha}};
  m.diffusion = [alpha](const Composition& c) {
    Matrix a(1, 1);
    a(0, 0) = c.solvent() * std::pow(c.u[0], alpha);
    return a;
  };
  m.reduced_mobility = [alpha](const AugmentedComposition& ac) {
    const double u0 = ac.bar[0], u1 = ac.bar[1];
    const double p = std::pow(u1, alpha);
    Matrix rho(2, 2);
    rho(0, 0) = u0 * u1 * p;
    rho(0, 1) = -rho(0, 0);
    rho(1, 1) = u0 * u0 * p;
    rho(1, 0) = -rho(1, 1);
    return rho;
  };
  return m;
}

// ---- multiphase ---------------------------------------------------------------

ModelSpec multiphase_model(double q11, double q12, double q22) {
  require(q11 > 0.0 && q12 > 0.0 && q22 > 0.0,
          "multiphase model: pressure coefficients must be positive");
  require(16.0 * q11 * q22 > q12 * q12,
          "multiphase model: requires 16 q11 q22 > q12^2");
  ModelSpec m;
  m.name = "multiphase";
  m.n = 2;
  m.s = 1.0;
  m.params = {{"q11", q11}, {"q12", q12}, {"q22", q22}};
  m.diffusion = [q11, q12, q22](const Composition& c) {
    const double u1 = c.u[0], u2 = c.u[1];
    const double q1 = q11 * u1 + q12 * u1 * u2;
    const double q2 = q12 * u1 * u2 + q22 * u2;
    Matrix a(2, 2);
    a(0, 0) = u1 * (2.0 * q11 + q12 * u2 * (2.0 - u2) - 2.0 * q1);
    a(0, 1) = u1 * (q12 * u1 * (1.0 - u1) - 2.0 * q2);
    a(1, 0) = u2 * (q12 * u2 * (1.0 - u2) - 2.0 * q1);
    a(1, 1) = u2 * (2.0 * q22 + q12 * u1 * (2.0 - u1) - 2.0 * q2);
    return a;
  };
  // Bbar_ij / u_i expanded by hand from B = A h''^{-1}; cubic polynomials.
  m.reduced_mobility = [q11, q12, q22](const AugmentedComposition& ac) {
    const double u0 = ac.bar[0], u1 = ac.bar[1], u2 = ac.bar[2];
    const double core = 2.0 * q11 * u1 * u1 + 3.0 * q12 * u1 * u2 * (u1 + u2) +
                        2.0 * q22 * u2 * u2;
    Matrix rho(3, 3);
    rho(0, 0) = u0 * core;
    rho(0, 1) = u1 * (core - 2.0 * q11 * u1 - 2.0 * q12 * u1 * u2 - q12 * u2 * u2);
    rho(0, 2) = u2 * (core - q12 * u1 * u1 - 2.0 * q12 * u1 * u2 - 2.0 * q22 * u2);
    rho(1, 0) = u0 * (core - 2.0 * q11 * u1 - 3.0 * q12 * u1 * u2);
    rho(1, 1) = u1 * (core - 4.0 * q11 * u1 + 2.0 * q11 - 5.0 * q12 * u1 * u2 -
                      q12 * u2 * u2 + 2.0 * q12 * u2);
    rho(1, 2) = u2 * (core - 2.0 * q11 * u1 - q12 * u1 * u1 - 5.0 * q12 * u1 * u2 +
                      q12 * u1 - 2.0 * q22 * u2);
    rho(2, 0) = u0 * (core - 3.0 * q12 * u1 * u2 - 2.0 * q22 * u2);
    rho(2, 1) = u1 * (core - 2.0 * q11 * u1 - 5.0 * q12 * u1 * u2 - q12 * u2 * u2 +
                      q12 * u2 - 2.0 * q22 * u2);
    rho(2, 2) = u2 * (core - q12 * u1 * u1 - 5.0 * q12 * u1 * u2 + 2.0 * q12 * u1 -
                      4.0 * q22 * u2 + 2.0 * q22);
    return rho;
  };
  return m;
}

// ---- tumor --------------------------------------------------------------------

ModelSpec tumor_model(double beta, double theta) {
  require(beta > 0.0 && theta > 0.0, "tumor model: beta and theta must be positive");
  require(theta < 4.0 / std::sqrt(beta), "tumor model: requires theta < 4 / sqrt(beta)");
  ModelSpec m;
  m.name = "tumor";
  m.n = 2;
  m.s = 1.0;
  m.params = {{"beta", beta}, {"theta", theta}};
  m.diffusion = [beta, theta](const Composition& c) {
    const double u1 = c.u[0], u2 = c.u[1];
    Matrix a(2, 2);
    a(0, 0) = 2.0 * u1 * (1.0 - u1) - beta * theta * u1 * u2 * u2;
    a(0, 1) = -2.0 * beta * u1 * u2 * (1.0 + theta * u1);
    a(1, 0) = -2.0 * u1 * u2 + beta * theta * (1.0 - u2) * u2 * u2;
    a(1, 1) = 2.0 * beta * u2 * (1.0 - u2) * (1.0 + theta * u1);
    return a;
  };
  m.reduced_mobility = [beta, theta](const AugmentedComposition& ac) {
    const double u0 = ac.bar[0], u1 = ac.bar[1], u2 = ac.bar[2];
    const double bt = beta * theta;
    const double core = 3.0 * bt * u1 * u2 * u2 + 2.0 * beta * u2 * u2 + 2.0 * u1 * u1;
    Matrix rho(3, 3);
    rho(0, 0) = u0 * core;
    rho(0, 1) = u1 * (core - bt * u2 * u2 - 2.0 * u1);
    rho(0, 2) = u2 * (core - 2.0 * bt * u1 * u2 - 2.0 * beta * u2);
    rho(1, 0) = u0 * (core - 2.0 * u1);
    rho(1, 1) = u1 * (core - bt * u2 * u2 - 4.0 * u1 + 2.0);
    rho(1, 2) = u2 * (core - 2.0 * bt * u1 * u2 - 2.0 * beta * u2 - 2.0 * u1);
    rho(2, 0) = u0 * (core - 3.0 * bt * u1 * u2 - 2.0 * beta * u2);
    rho(2, 1) = u1 * (core - 3.0 * bt * u1 * u2 - bt * u2 * u2 + bt * u2 -
                      2.0 * beta * u2 - 2.0 * u1);
    rho(2, 2) = u2 * (core - 5.0 * bt * u1 * u2 + 2.0 * bt * u1 - 4.0 * beta * u2 +
                      2.0 * beta);
    return rho;
  };
  return m;
}

// ---- Busenberg-Travis -----------------------------------------------------------

ModelSpec busenberg_travis_model(const Matrix& P) {
  const int n = static_cast<int>(P.rows());
  require(P.cols() == n && n >= 1, "Busenberg-Travis model: P must be square");
  require((P - P.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
          "Busenberg-Travis model: P must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(P);
  require(eig.eigenvalues().minCoeff() > 0.0,
          "Busenberg-Travis model: P must be positive definite");

  ModelSpec m;
  m.name = "busenberg_travis";
  m.n = n;
  m.s = 1.0;
  m.param_table.assign(P.data(), P.data() + P.size());
  m.params = {{"n", static_cast<double>(n)}};
  const Matrix Pm = P;
  m.diffusion = [Pm, n](const Composition& c) {
    const Vector p = Pm * c.u;  // p_j(u)
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = c.u[i] * (Pm(i, j) - p[j]);
    return a;
  };
  m.reduced_mobility = [Pm, n](const AugmentedComposition& ac) {
    const Vector u = ac.bar.tail(n);
    const double u0 = ac.bar[0];
    const Vector p = Pm * u;
    const double Q = u.dot(p);
    Matrix rho(n + 1, n + 1);
    rho(0, 0) = u0 * Q;
    for (int k = 0; k < n; ++k) {
      rho(0, k + 1) = -u[k] * (p[k] - Q);
      rho(k + 1, 0) = -u0 * (p[k] - Q);
    }
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        rho(i + 1, k + 1) = u[k] * (Pm(i, k) - p[i] - p[k] + Q);
    return rho;
  };
  return m;
}

// ---- Maxwell-Stefan (two species) ----------------------------------------------

ModelSpec maxwell_stefan_2(double d01, double d02, double d12) {
  require(d01 > 0.0 && d02 > 0.0 && d12 > 0.0,
          "Maxwell-Stefan model: diffusivities must be positive");
  ModelSpec m;
  m.name = "maxwell_stefan";
  m.n = 2;
  m.s = 0.5;
  m.params = {{"d01", d01}, {"d02", d02}, {"d12", d12}};
  m.diffusion = [d01, d02, d12](const Composition& c) {
    const double u0 = c.solvent(), u1 = c.u[0], u2 = c.u[1];
    const double a = d01 * d02 * u0 + d01 * d12 * u1 + d02 * d12 * u2;
    Matrix A(2, 2);
    A(0, 0) = (d02 + (d12 - d02) * u1) / a;
    A(0, 1) = ((d12 - d01) * u1) / a;
    A(1, 0) = ((d12 - d02) * u2) / a;
    A(1, 1) = (d01 + (d12 - d01) * u2) / a;
    return A;
  };
  m.reduced_mobility = [d01, d02, d12](const AugmentedComposition& ac) {
    const double u0 = ac.bar[0], u1 = ac.bar[1], u2 = ac.bar[2];
    const double a = d01 * d02 * u0 + d01 * d12 * u1 + d02 * d12 * u2;
    const double e1 = d01 * u2 - d02 * (u0 + u2) - d12 * (u1 + u2);
    const double e2 = d02 * u1 - d01 * (u0 + u1) - d12 * (u1 + u2);
    const double e3 = -d01 * (u0 + u1) - d02 * (u0 + u2) + d12 * u0;
    Matrix rho(3, 3);
    rho(0, 0) = (d01 * u2 * u0 + d02 * u1 * u0 + d12 * (u1 + u2) * (u1 + u2)) / a;
    rho(0, 1) = u1 * e1 / a;
    rho(0, 2) = u2 * e2 / a;
    rho(1, 0) = u0 * e1 / a;
    rho(1, 1) = (d01 * u1 * u2 + d02 * (u0 + u2) * (u0 + u2) + d12 * u1 * u0) / a;
    rho(1, 2) = u2 * e3 / a;
    rho(2, 0) = u0 * e2 / a;
    rho(2, 1) = u1 * e3 / a;
    rho(2, 2) = (d01 * (u0 + u1) * (u0 + u1) + d02 * u1 * u2 + d12 * u2 * u0) / a;
    return rho;
  };
  return m;
}

// ---- thin film -------------------------------------------------------------------

ModelSpec thin_film_model(const Matrix& a) {
  const int n1 = static_cast<int>(a.rows());
  require(a.cols() == n1 && n1 >= 2, "thin-film model: coefficient table must be square");
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n1; ++j) {
      if (i == j) continue;
      require(std::abs(a(i, j) - a(j, i)) <= 1e-12,
              "thin-film model: coefficients must be symmetric");
      require(a(i, j) > 0.0, "thin-film model: off-diagonal coefficients must be positive");
    }

  ModelSpec m;
  m.name = "thin_film";
  m.n = n1 - 1;
  m.s = 0.5;
  m.param_table.assign(a.data(), a.data() + a.size());
  m.params = {{"n", static_cast<double>(n1 - 1)}};
  const Matrix am = a;
  const int n = n1 - 1;
  m.diffusion = [am, n](const Composition& c) {
    Matrix A(n, n);
    for (int i = 0; i < n; ++i) {
      double diag = am(i + 1, 0);
      for (int k = 0; k < n; ++k)
        if (k != i) diag += (am(i + 1, k + 1) - am(i + 1, 0)) * c.u[k];
      for (int j = 0; j < n; ++j)
        A(i, j) = (i == j) ? diag : -(am(i + 1, j + 1) - am(i + 1, 0)) * c.u[i];
    }
    return A;
  };
  m.reduced_mobility = [am, n](const AugmentedComposition& ac) {
    const double u0 = ac.bar[0];
    Matrix rho = Matrix::Zero(n + 1, n + 1);
    double r00 = 0.0;
    for (int k = 1; k <= n; ++k) r00 += am(k, 0) * ac.bar[k];
    rho(0, 0) = r00;
    for (int j = 1; j <= n; ++j) rho(0, j) = -am(0, j) * ac.bar[j];
    for (int i = 1; i <= n; ++i) {
      rho(i, 0) = -am(i, 0) * u0;
      double diag = am(i, 0) * u0;
      for (int k = 1; k <= n; ++k) {
        if (k == i) continue;
        diag += am(i, k) * ac.bar[k];
        rho(i, k) = -am(i, k) * ac.bar[k];
      }
      rho(i, i) = diag;
    }
    return rho;
  };
  return m;
}

// ---- ion channel -----------------------------------------------------------------

ModelSpec ion_channel_model(const Vector& d) {
  const int n = static_cast<int>(d.size());
  require(n >= 1, "ion-channel model: need at least one species");
  for (int i = 0; i < n; ++i)
    require(d[i] > 0.0, "ion-channel model: diffusivities must be positive");

  ModelSpec m;
  m.name = "ion_channel";
  m.n = n;
  m.s = 0.5;
  m.param_table.assign(d.data(), d.data() + d.size());
  m.params = {{"n", static_cast<double>(n)}};
  m.improved_ion_lemma = true;
  m.ion_c_A = d.minCoeff();
  const Vector dv = d;
  // A = B h'' with B = diag(d_i u_i); defined for interior compositions only.
  m.diffusion = [dv, n](const Composition& c) {
    const double u0 = c.solvent();
    Matrix A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        A(i, j) = dv[i] * ((i == j ? 1.0 : 0.0) + c.u[i] / u0);
    return A;
  };
  m.reduced_mobility = [dv, n](const AugmentedComposition& ac) {
    const double u0 = ac.bar[0];
    Matrix rho = Matrix::Zero(n + 1, n + 1);
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) acc += dv[k - 1] * ac.bar[k];
    rho(0, 0) = acc / u0;  // genuinely singular as u0 -> 0
    for (int j = 1; j <= n; ++j) rho(0, j) = -dv[j - 1] * ac.bar[j] / u0;
    for (int i = 1; i <= n; ++i) {
      rho(i, 0) = -dv[i - 1];
      rho(i, i) = dv[i - 1];
    }
    return rho;
  };
  return m;
}

// ---- reactions -------------------------------------------------------------------

ModelSpec with_reaction(ModelSpec m, ReactionEval r, double C_R_hint) {
  probe_reaction_faces(m.n, r);
  m.reaction = std::move(r);
  m.reaction_rate_hint = C_R_hint;
  return m;
}

ReactionEval logistic_reaction(int n, double rate) {
  return [n, rate](const Composition& c) {
    const double drive = c.solvent() - 0.5;
    Vector r(n);
    for (int i = 0; i < n; ++i) r[i] = rate * c.u[i] * drive;
    return r;
  };
}

// ---- derived evaluations -----------------------------------------------------------

AugmentedMobility augmented_mobility(const ModelSpec& m, const AugmentedComposition& ac) {
  if (!m.reduced_mobility) throw MissingReducedMobility(m.name + ": no factored reduced mobility");
  const Matrix rho = m.reduced_mobility(ac);
  Matrix bar(rho.rows(), rho.cols());
  for (int i = 0; i < rho.rows(); ++i)
    for (int j = 0; j < rho.cols(); ++j) bar(i, j) = ac.bar[i] * rho(i, j);
  return AugmentedMobility{std::move(bar)};
}

Matrix factored_mobility(const ModelSpec& m, const Composition& c) {
  const AugmentedComposition ac = AugmentedComposition::from(c);
  const Matrix rho = m.reduced_mobility(ac);
  Matrix B(m.n, m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) B(i, j) = c.u[i] * rho(i + 1, j + 1);
  return B;
}

Vector augmented_reaction(const ModelSpec& m, const Composition& c) {
  if (!m.has_reaction()) throw MissingReaction(m.name + ": model carries no reaction");
  const Vector r = (*m.reaction)(c);
  Vector bar(m.n + 1);
  bar[0] = -r.sum();
  bar.tail(m.n) = r;
  return bar;
}

// ---- presets -----------------------------------------------------------------------

ModelSpec preset_model(const std::string& name) {
  if (name == "scalar") return scalar_model(1.0);
  if (name == "multiphase") return multiphase_model(1.0, 1.0, 1.0);
  if (name == "tumor") return tumor_model(1.0, 1.0);
  if (name == "busenberg_travis") {
    Matrix P = Matrix::Identity(2, 2) + 0.5 * Matrix::Ones(2, 2);
    return busenberg_travis_model(P);
  }
  if (name == "maxwell_stefan") return maxwell_stefan_2(1.0, 2.0, 3.0);
  if (name == "thin_film") return thin_film_model(Matrix::Ones(3, 3));
  if (name == "ion_channel") {
    Vector d(2);
    d << 1.0, 2.0;
    return ion_channel_model(d);
  }
  throw InvalidParameter("unknown model preset: " + name);
}

std::vector<std::string> preset_names() {
  return {"scalar", "multiphase", "tumor", "busenberg_travis",
          "maxwell_stefan", "thin_film", "ion_channel"};
}

}  // namespace xdiff

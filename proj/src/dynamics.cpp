#include "mpolicy/dynamics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <fstream>
#include <sstream>
#include <string>

#include "mpolicy/errors.hpp"
#include "mpolicy/text.hpp"

namespace mpolicy {

namespace {

constexpr const char* kModelMagic = "mpolicy-transition-model";
constexpr int kModelVersion = 1;

void check_covariance(const Eigen::Matrix3d& sigma) {
  if (!sigma.allFinite()) throw DomainError("shock covariance has non-finite entries");
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw DomainError("shock covariance is not symmetric");
  }
  Eigen::LLT<Eigen::Matrix3d> jittered(sigma + 1e-12 * Eigen::Matrix3d::Identity());
  if (jittered.info() != Eigen::Success) throw DomainError("shock covariance is not positive semidefinite");
}

template <typename Derived>
void write_values(std::ostream& out, const char* key, const Eigen::MatrixBase<Derived>& m) {
  out << key;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index col = 0; col < m.cols(); ++col) out << ' ' << text::exact(m(r, col));
  }
  out << '\n';
}

}  // namespace

Eigen::Matrix3d shock_factor(const Eigen::Matrix3d& sigma) {
  if (sigma.isZero(0.0)) return Eigen::Matrix3d::Zero();
  Eigen::LLT<Eigen::Matrix3d> plain(sigma);
  if (plain.info() == Eigen::Success) return plain.matrixL();
  Eigen::LLT<Eigen::Matrix3d> jittered(sigma + 1e-12 * Eigen::Matrix3d::Identity());
  if (jittered.info() != Eigen::Success) throw DomainError("shock covariance is not positive semidefinite");
  return jittered.matrixL();
}

TransitionModel TransitionModel::make(const Eigen::Matrix3d& A, const Eigen::Vector3d& B, const Eigen::Vector3d& c,
                                      const Eigen::Matrix3d& sigma, bool with_intercept) {
  check_covariance(sigma);
  TransitionModel m;
  m.A = A;
  m.B = B;
  m.c = c;
  m.sigma = sigma;
  m.cholesky_L = shock_factor(sigma);
  m.with_intercept = with_intercept;
  return m;
}

std::vector<Transition> transitions_of(const StateSeries& history) {
  std::vector<Transition> out;
  for (auto k : history.transition_starts()) {
    const auto& s = history.states[k];
    out.push_back({s.macro(), s.rate, history.states[k + 1].macro()});
  }
  return out;
}

FitResult fit_ols(std::span<const Transition> data, bool with_intercept) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const Eigen::Index p = with_intercept ? 5 : 4;
  if (n < 5 || n <= p) {
    throw InsufficientDataError("OLS fit needs at least 5 transitions and more than " + std::to_string(p) +
                                "; got " + std::to_string(n));
  }
  Eigen::MatrixXd X(n, p);
  Eigen::MatrixXd Y(n, 3);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& t = data[static_cast<std::size_t>(r)];
    X.row(r).head<3>() = t.x.transpose();
    X(r, 3) = t.rate;
    if (with_intercept) X(r, 4) = 1.0;
    Y.row(r) = t.x_next.transpose();
  }
  if (!X.allFinite() || !Y.allFinite()) throw DomainError("non-finite values in regression data");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < p) throw SingularDesignError("regressor matrix is rank deficient");
  const Eigen::MatrixXd coef = qr.solve(Y);  // p x 3
  const Eigen::MatrixXd resid = Y - X * coef;

  FitResult result;
  Eigen::Matrix3d A = coef.topRows(3).transpose();
  Eigen::Vector3d B = coef.row(3).transpose();
  Eigen::Vector3d c = with_intercept ? Eigen::Vector3d(coef.row(4).transpose()) : Eigen::Vector3d::Zero();
  Eigen::Matrix3d sigma = resid.transpose() * resid / static_cast<double>(n - p);
  sigma = 0.5 * (sigma + sigma.transpose());
  result.model = TransitionModel::make(A, B, c, sigma, with_intercept);

  auto& diag = result.diagnostics;
  diag.n_transitions = static_cast<std::size_t>(n);
  diag.residual_means = resid.colwise().mean().transpose();
  for (int k = 0; k < 3; ++k) {
    const double ss_res = resid.col(k).squaredNorm();
    const double ss_tot = (Y.col(k).array() - Y.col(k).mean()).matrix().squaredNorm();
    const double r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    diag.per_equation_r2(k) = std::clamp(r2, 0.0, 1.0);
  }
  return result;
}

FitResult fit_ols(const StateSeries& history, bool with_intercept) {
  const auto data = transitions_of(history);
  return fit_ols(std::span<const Transition>(data), with_intercept);
}

Eigen::Vector3d step(const TransitionModel& model, const Eigen::Vector3d& x, double rate, Rng& rng) {
  Eigen::Vector3d z;
  for (int k = 0; k < 3; ++k) z(k) = standard_normal(rng);
  return model.mean_next(x, rate) + model.cholesky_L * z;
}

void save_model(std::ostream& out, const TransitionModel& model) {
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "intercept " << (model.with_intercept ? "on" : "off") << '\n';
  write_values(out, "A", model.A);
  write_values(out, "B", model.B);
  write_values(out, "c", model.c);
  write_values(out, "sigma", model.sigma);
}

TransitionModel load_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty model file");
  auto head = text::tokens(line);
  if (head.size() != 2 || head[0] != kModelMagic) throw FormatError("not a transition model file");
  if (head[1] != std::to_string(kModelVersion)) throw FormatError("unsupported model file version " + head[1]);

  std::optional<bool> intercept;
  std::map<std::string, std::vector<double>> values;
  while (std::getline(in, line)) {
    auto tok = text::tokens(line);
    if (tok.empty() || tok[0].starts_with('#')) continue;
    if (tok[0] == "intercept") {
      if (tok.size() != 2 || (tok[1] != "on" && tok[1] != "off")) throw FormatError("bad intercept line");
      intercept = tok[1] == "on";
      continue;
    }
    std::vector<double> v;
    for (std::size_t k = 1; k < tok.size(); ++k) v.push_back(text::parse_double(tok[k], "model key " + tok[0]));
    values[tok[0]] = std::move(v);
  }
  const auto take = [&](const char* key, std::size_t n) {
    auto it = values.find(key);
    if (it == values.end() || it->second.size() != n) {
      throw FormatError(std::string("model file: '") + key + "' missing or wrong size");
    }
    return it->second;
  };
  if (!intercept) throw FormatError("model file: 'intercept' missing");
  const auto a = take("A", 9), b = take("B", 3), c = take("c", 3), s = take("sigma", 9);
  Eigen::Matrix3d A, sigma;
  for (int r = 0; r < 3; ++r) {
    for (int col = 0; col < 3; ++col) {
      A(r, col) = a[static_cast<std::size_t>(r * 3 + col)];
      sigma(r, col) = s[static_cast<std::size_t>(r * 3 + col)];
    }
  }
  try {
    return TransitionModel::make(A, Eigen::Vector3d(b[0], b[1], b[2]), Eigen::Vector3d(c[0], c[1], c[2]), sigma,
                                 *intercept);
  } catch (const DomainError& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const TransitionModel& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  save_model(out, model);
}

TransitionModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path.string());
  return load_model(in);
}

void write_diagnostics(std::ostream& out, const FitDiagnostics& diag) {
  out << "n_transitions " << diag.n_transitions << '\n';
  write_values(out, "r2", diag.per_equation_r2.transpose());
  write_values(out, "residual_means", diag.residual_means.transpose());
}

}  // namespace mpolicy

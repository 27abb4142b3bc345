#include "scoped/dsm.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <sstream>

#include "scoped/errors.hpp"
#include "scoped/rng.hpp"

namespace scoped {
namespace {

using Matrix = Eigen::MatrixXd;
using RowMatrixMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMatrixMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

Matrix apply_activation(Activation a, const Matrix& z) {
  switch (a) {
    case Activation::kSilu:
      return z.array() / (1.0 + (-z.array()).exp());
    case Activation::kTanh:
      return z.array().tanh();
    case Activation::kRelu:
      return z.array().max(0.0);
  }
  return z;
}

Matrix activation_slope(Activation a, const Matrix& z) {
  switch (a) {
    case Activation::kSilu: {
      const Eigen::ArrayXXd sig = 1.0 / (1.0 + (-z.array()).exp());
      return sig * (1.0 + z.array() * (1.0 - sig));
    }
    case Activation::kTanh: {
      const Eigen::ArrayXXd t = z.array().tanh();
      return 1.0 - t * t;
    }
    case Activation::kRelu:
      return (z.array() > 0.0).cast<double>();
  }
  return Matrix::Ones(z.rows(), z.cols());
}

struct Standardization {
  std::vector<double> mean;
  std::vector<double> stddev;
};

Standardization fit_standardization(const Dataset& data) {
  const std::size_t n = data.rows();
  Standardization st{std::vector<double>(data.dim, 0.0), std::vector<double>(data.dim, 0.0)};
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i < data.dim; ++i) st.mean[i] += data.row(r)[i];
  for (double& m : st.mean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i < data.dim; ++i) {
      const double d = data.row(r)[i] - st.mean[i];
      st.stddev[i] += d * d;
    }
  for (double& s : st.stddev) {
    s = std::sqrt(s / static_cast<double>(n));
    if (!(s > 1e-12)) s = 1.0;  // constant coordinate
  }
  return st;
}

}  // namespace

NoiseSampling parse_noise_sampling(std::string_view name) {
  if (name == "uniform") return NoiseSampling::kUniformSteps;
  if (name == "lognormal") return NoiseSampling::kLogNormal;
  throw InputError("unknown noise sampling rule \"" + std::string(name) + "\"");
}

WeightRule parse_weight_rule(std::string_view name) {
  if (name == "sigma2") return WeightRule::kSigmaSquared;
  if (name == "edm") return WeightRule::kEdm;
  if (name == "unit") return WeightRule::kUnit;
  throw InputError("unknown weight rule \"" + std::string(name) + "\"");
}

double dsm_weight(WeightRule rule, const NoiseLevel& level) {
  const double s2 = level.signal_scale * level.signal_scale;
  const double v = level.sigma * level.sigma;
  switch (rule) {
    case WeightRule::kSigmaSquared: return v;
    case WeightRule::kEdm: return v * (v + s2) / s2;
    case WeightRule::kUnit: return 1.0;
  }
  return 1.0;
}

TrainResult train_dsm(MlpDenoiser model, const Dataset& data, const NoiseSchedule* schedule,
                      const DsmTrainConfig& cfg) {
  if (data.empty()) throw InputError("train_dsm: empty dataset");
  if (data.dim != model.dim()) throw InputError("train_dsm: dataset dimension does not match the network");
  if (cfg.epochs == 0 || cfg.batch_size == 0) throw InputError("train_dsm: epochs and batch size must be positive");
  if (!(cfg.learning_rate > 0.0)) throw InputError("train_dsm: learning rate must be positive");
  if (cfg.sampling == NoiseSampling::kUniformSteps && schedule == nullptr)
    throw InputError("train_dsm: uniform step sampling needs a discrete schedule");
  if (cfg.sampling == NoiseSampling::kLogNormal && !(cfg.prior.sigma_log > 0.0))
    throw InputError("train_dsm: log-normal sampling needs sigma_log > 0");

  if (cfg.standardize) {
    auto st = fit_standardization(data);
    model.set_standardization(std::move(st.mean), std::move(st.stddev));
  }
  const std::size_t n = data.rows();
  const std::size_t dim = data.dim;
  Dataset clean(dim, {});
  clean.values.reserve(data.values.size());
  for (std::size_t r = 0; r < n; ++r) clean.append(model.to_model_space(data.row(r)));

  const auto sizes = model.layer_sizes();
  const std::size_t layers = sizes.size() - 1;
  const Activation act = model.spec().activation;
  const bool eps_param = model.spec().parameterization == Parameterization::kEps;
  std::vector<double>& params = model.mutable_params();
  std::vector<std::size_t> offsets(layers);
  {
    std::size_t off = 0;
    for (std::size_t l = 0; l < layers; ++l) {
      offsets[l] = off;
      off += sizes[l] * sizes[l + 1] + sizes[l + 1];
    }
  }

  std::vector<double> grad(params.size()), m1(params.size(), 0.0), m2(params.size(), 0.0);
  Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::kTrain)}));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t adam_step = 0;

  std::vector<double> trace;
  std::vector<Matrix> acts(layers + 1), pre(layers);
  std::vector<double> feature_buf(model.input_dim()), xt(dim), eps(dim);

  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t b = std::min<std::size_t>(cfg.batch_size, n - start);
      Matrix& input = acts[0];
      input.resize(static_cast<Eigen::Index>(sizes[0]), static_cast<Eigen::Index>(b));
      Matrix target(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(b));
      Eigen::VectorXd lambda(static_cast<Eigen::Index>(b));

      for (std::size_t j = 0; j < b; ++j) {
        const auto x0 = clean.row(order[start + j]);
        NoiseLevel level;
        if (cfg.sampling == NoiseSampling::kUniformSteps) {
          level = level_at(*schedule, static_cast<int>(rng.integer(1, schedule->steps)));
        } else {
          level = continuous_level(std::exp(cfg.prior.mu + cfg.prior.sigma_log * rng.normal()));
        }
        rng.fill_normal(eps);
        for (std::size_t i = 0; i < dim; ++i) xt[i] = level.signal_scale * x0[i] + level.sigma * eps[i];
        const Preconditioning pc = preconditioning(level);
        model.features<double>(xt, pc, feature_buf);
        for (std::size_t i = 0; i < sizes[0]; ++i)
          input(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = feature_buf[i];
        const double w = dsm_weight(cfg.weight, level);
        const double var = level.sigma * level.sigma;
        if (eps_param) {
          // s + eps/sigma = (eps - F)/sigma
          lambda(static_cast<Eigen::Index>(j)) = w / var;
          for (std::size_t i = 0; i < dim; ++i)
            target(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = eps[i];
        } else {
          // s + eps/sigma = (c_skip x + c_out F - s x0)/sigma^2
          lambda(static_cast<Eigen::Index>(j)) = w * pc.c_out * pc.c_out / (var * var);
          for (std::size_t i = 0; i < dim; ++i)
            target(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (level.signal_scale * x0[i] - pc.c_skip * xt[i]) / pc.c_out;
        }
      }

      for (std::size_t l = 0; l < layers; ++l) {
        ConstRowMatrixMap w(params.data() + offsets[l], static_cast<Eigen::Index>(sizes[l + 1]),
                            static_cast<Eigen::Index>(sizes[l]));
        Eigen::Map<const Eigen::VectorXd> bias(params.data() + offsets[l] + sizes[l] * sizes[l + 1],
                                               static_cast<Eigen::Index>(sizes[l + 1]));
        pre[l] = (w * acts[l]).colwise() + bias;
        acts[l + 1] = l + 1 == layers ? pre[l] : apply_activation(act, pre[l]);
      }

      const Matrix diff = acts[layers] - target;
      const Eigen::VectorXd per_sample = diff.colwise().squaredNorm().transpose();
      const double batch_loss = lambda.dot(per_sample) / static_cast<double>(b);
      if (!std::isfinite(batch_loss)) {
        std::ostringstream msg;
        msg << "train_dsm: non-finite loss at epoch " << epoch << ", batch starting at row " << start;
        throw NumericError(msg.str());
      }
      epoch_loss += batch_loss * static_cast<double>(b);

      Matrix g = diff * (2.0 * lambda / static_cast<double>(b)).asDiagonal();
      for (std::size_t l = layers; l-- > 0;) {
        RowMatrixMap gw(grad.data() + offsets[l], static_cast<Eigen::Index>(sizes[l + 1]),
                        static_cast<Eigen::Index>(sizes[l]));
        Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets[l] + sizes[l] * sizes[l + 1],
                                       static_cast<Eigen::Index>(sizes[l + 1]));
        gw.noalias() = g * acts[l].transpose();
        gb = g.rowwise().sum();
        if (l > 0) {
          ConstRowMatrixMap w(params.data() + offsets[l], static_cast<Eigen::Index>(sizes[l + 1]),
                              static_cast<Eigen::Index>(sizes[l]));
          g = (w.transpose() * g).cwiseProduct(activation_slope(act, pre[l - 1]));
        }
      }

      ++adam_step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam_step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam_step));
      for (std::size_t k = 0; k < params.size(); ++k) {
        m1[k] = cfg.beta1 * m1[k] + (1.0 - cfg.beta1) * grad[k];
        m2[k] = cfg.beta2 * m2[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
        params[k] -= cfg.learning_rate * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + cfg.adam_epsilon);
      }
    }
    trace.push_back(epoch_loss / static_cast<double>(n));
  }
  return TrainResult{std::move(model), std::move(trace)};
}

double dsm_loss(const ScoreModel& model, const Dataset& clean, std::span<const DsmDraw> draws,
                WeightRule rule) {
  if (clean.rows() != draws.size()) throw InputError("dsm_loss: one draw per clean point required");
  if (draws.empty()) throw InputError("dsm_loss: empty batch");
  double total = 0.0;
  for (std::size_t r = 0; r < draws.size(); ++r) {
    const auto& d = draws[r];
    const auto xt = corrupt(clean.row(r), d.level, d.eps);
    const auto s = model.evaluate(xt, d.level);
    double sq = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double e = s[i] + d.eps[i] / d.level.sigma;
      sq += e * e;
    }
    total += dsm_weight(rule, d.level) * sq;
  }
  return total / static_cast<double>(draws.size());
}

}  // namespace scoped

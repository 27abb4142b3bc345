#include "scoped/model_io.hpp"

#include "scoped/analytic.hpp"
#include "scoped/bytes.hpp"
#include "scoped/errors.hpp"
#include "scoped/mlp.hpp"

namespace scoped {
namespace {

void header(ByteWriter& w, ModelKind kind, std::uint32_t tag, std::uint64_t dim) {
  w.magic("SCPD");
  w.put<std::uint32_t>(kModelFormatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(kind));
  w.put<std::uint32_t>(tag);
  w.put<std::uint64_t>(dim);
}

void identity_standardization(ByteWriter& w, std::size_t dim) {
  for (std::size_t i = 0; i < dim; ++i) w.put(0.0);
  for (std::size_t i = 0; i < dim; ++i) w.put(1.0);
}

}  // namespace

std::uint64_t model_fingerprint(const ScoreModel& model) { return fnv1a64(model.serialize()); }

std::vector<std::uint8_t> encode_mlp(const MlpDenoiser& model) {
  ByteWriter w;
  header(w, ModelKind::kMlp, static_cast<std::uint32_t>(model.spec().parameterization), model.dim());
  const auto sizes = model.layer_sizes();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(sizes.size()));
  for (std::size_t s : sizes) w.put<std::uint32_t>(static_cast<std::uint32_t>(s));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.spec().activation));
  w.put<std::uint32_t>(model.spec().frequencies);
  w.put_all<double>(model.data_mean());
  w.put_all<double>(model.data_std());
  w.put<std::uint64_t>(model.params().size());
  w.put_all<double>(model.params());
  return w.take();
}

std::vector<std::uint8_t> encode_gaussian(const AnalyticGaussianScore& model) {
  ByteWriter w;
  header(w, ModelKind::kGaussian, 0, model.dim());
  w.put<std::uint32_t>(0);
  w.put<std::uint32_t>(0);
  w.put<std::uint32_t>(0);
  identity_standardization(w, model.dim());
  w.put<std::uint64_t>(model.dim() + 1);
  w.put_all<double>(model.mean());
  w.put(model.variance());
  return w.take();
}

std::vector<std::uint8_t> encode_gmm(const GmmScore& model) {
  ByteWriter w;
  header(w, ModelKind::kGmm, 0, model.dim());
  w.put<std::uint32_t>(1);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.components()));
  w.put<std::uint32_t>(0);
  w.put<std::uint32_t>(0);
  identity_standardization(w, model.dim());
  const std::size_t k = model.components();
  w.put<std::uint64_t>(k + k * model.dim() + k);
  w.put_all<double>(model.weights());
  for (const auto& m : model.means()) w.put_all<double>(m);
  w.put_all<double>(model.variances());
  return w.take();
}

std::unique_ptr<ScoreModel> decode_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "model file");
  r.expect_magic("SCPD");
  const auto version = r.get<std::uint32_t>();
  if (version != kModelFormatVersion)
    throw InputError("model file: unsupported version " + std::to_string(version));
  const auto kind = static_cast<ModelKind>(r.get<std::uint32_t>());
  const auto tag = r.get<std::uint32_t>();
  const auto dim = r.get<std::uint64_t>();
  if (dim == 0 || dim > (1u << 24)) throw InputError("model file: implausible dimension");
  const auto layer_count = r.get<std::uint32_t>();
  const auto widths = r.get_n<std::uint32_t>(layer_count);
  const auto activation = r.get<std::uint32_t>();
  const auto frequencies = r.get<std::uint32_t>();
  auto mean = r.get_n<double>(dim);
  auto stddev = r.get_n<double>(dim);
  const auto count = r.get<std::uint64_t>();
  auto params = r.get_n<double>(count);
  if (r.remaining() != 0) throw InputError("model file: trailing bytes");

  switch (kind) {
    case ModelKind::kMlp: {
      if (layer_count < 2 || widths.front() != dim + 1 + 2 * frequencies || widths.back() != dim)
        throw InputError("model file: layer widths inconsistent with dimension");
      if (activation > 2 || tag > 1) throw InputError("model file: unknown activation or parameterization");
      MlpSpec spec;
      spec.hidden.assign(widths.begin() + 1, widths.end() - 1);
      spec.activation = static_cast<Activation>(activation);
      spec.parameterization = static_cast<Parameterization>(tag);
      spec.frequencies = frequencies;
      return std::make_unique<MlpDenoiser>(dim, std::move(spec), std::move(mean), std::move(stddev),
                                           std::move(params));
    }
    case ModelKind::kGaussian: {
      if (count != dim + 1) throw InputError("model file: gaussian parameter count mismatch");
      const double variance = params.back();
      params.pop_back();
      return std::make_unique<AnalyticGaussianScore>(std::move(params), variance);
    }
    case ModelKind::kGmm: {
      if (layer_count != 1) throw InputError("model file: mixture needs one width entry");
      const std::size_t k = widths[0];
      if (count != k * (dim + 2)) throw InputError("model file: mixture parameter count mismatch");
      std::vector<double> weights(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(k));
      std::vector<std::vector<double>> means(k);
      for (std::size_t c = 0; c < k; ++c) {
        auto first = params.begin() + static_cast<std::ptrdiff_t>(k + c * dim);
        means[c].assign(first, first + static_cast<std::ptrdiff_t>(dim));
      }
      std::vector<double> variances(params.end() - static_cast<std::ptrdiff_t>(k), params.end());
      return std::make_unique<GmmScore>(std::move(weights), std::move(means), std::move(variances));
    }
  }
  throw InputError("model file: unknown model kind");
}

std::unique_ptr<ScoreModel> load_model(const std::string& path) {
  return decode_model(read_file_bytes(path));
}

void save_model(const ScoreModel& model, const std::string& path) {
  write_file_bytes(path, model.serialize());
}

}  // namespace scoped

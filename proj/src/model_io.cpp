#include "pedtwin/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pedtwin/errors.hpp"

namespace pedtwin {

using nlohmann::ordered_json;

namespace {

template <typename Derived>
ordered_json tensor_to_json(const Eigen::MatrixBase<Derived>& m) {
  ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  j["data"] = std::move(data);
  return j;
}

template <typename Tensor>
void tensor_from_json(const ordered_json& j, Tensor& out) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows != out.rows() || cols != out.cols() || !data.is_array() ||
      data.size() != static_cast<std::size_t>(rows * cols)) {
    throw FormatError("tensor shape does not match config");
  }
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = data[k++].get<double>();
}

ordered_json lstm_to_json(const nn::LstmParams<double>& p) {
  ordered_json j;
  j["w_input"] = tensor_to_json(p.w_input);
  j["w_recurrent"] = tensor_to_json(p.w_recurrent);
  j["bias"] = tensor_to_json(p.bias);
  return j;
}

void lstm_from_json(const ordered_json& j, nn::LstmParams<double>& p) {
  tensor_from_json(j.at("w_input"), p.w_input);
  tensor_from_json(j.at("w_recurrent"), p.w_recurrent);
  tensor_from_json(j.at("bias"), p.bias);
}

ordered_json vec8(const FeatureVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

FeatureVector vec8_from(const ordered_json& j) {
  if (!j.is_array() || j.size() != kFeatureCount) throw FormatError("norm vector must have 8 entries");
  FeatureVector v;
  for (int i = 0; i < kFeatureCount; ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace

std::string model_to_json(const EncoderDecoderModel& model) {
  ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["role"] = to_string(model.role);
  const auto& c = model.config;
  j["config"] = {{"input_steps", c.input_steps},
                 {"output_steps", c.output_steps},
                 {"features_in", c.features_in},
                 {"enc1_units", c.enc1_units},
                 {"enc2_units", c.enc2_units},
                 {"dec_units", c.dec_units},
                 {"learning_rate", c.learning_rate},
                 {"epochs", c.epochs},
                 {"batch_size", c.batch_size},
                 {"seed", c.seed},
                 {"anneal_epochs", c.anneal_epochs}};
  j["norm"] = {{"in_min", vec8(model.norm.in_min)},
               {"in_max", vec8(model.norm.in_max)},
               {"out_min", model.norm.out_min},
               {"out_max", model.norm.out_max}};
  const auto& w = model.weights;
  j["weights"] = {{"enc1", lstm_to_json(w.enc1)},
                  {"enc2", lstm_to_json(w.enc2)},
                  {"dec1", lstm_to_json(w.dec1)},
                  {"dec2", lstm_to_json(w.dec2)},
                  {"head_w", tensor_to_json(w.head_w)},
                  {"head_b", tensor_to_json(w.head_b)}};
  return j.dump();
}

EncoderDecoderModel model_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::exception& e) {
    throw FormatError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("format_version")) throw FormatError("missing format_version");
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw VersionMismatch("model format_version " + std::to_string(version) + ", expected " +
                            std::to_string(kModelFormatVersion));
    }
    EncoderDecoderModel m;
    m.role = role_from_string(j.at("role").get<std::string>());
    const auto& c = j.at("config");
    m.config.input_steps = c.at("input_steps").get<int>();
    m.config.output_steps = c.at("output_steps").get<int>();
    m.config.features_in = c.at("features_in").get<int>();
    m.config.enc1_units = c.at("enc1_units").get<int>();
    m.config.enc2_units = c.at("enc2_units").get<int>();
    m.config.dec_units = c.at("dec_units").get<int>();
    m.config.learning_rate = c.at("learning_rate").get<double>();
    m.config.epochs = c.at("epochs").get<int>();
    m.config.batch_size = c.at("batch_size").get<int>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.anneal_epochs = c.value("anneal_epochs", 0);
    m.config.validate();

    const auto& n = j.at("norm");
    m.norm.in_min = vec8_from(n.at("in_min"));
    m.norm.in_max = vec8_from(n.at("in_max"));
    m.norm.out_min = n.at("out_min").get<double>();
    m.norm.out_max = n.at("out_max").get<double>();

    m.weights = nn::Seq2SeqWeights<double>::zeros(m.config.shape());
    const auto& w = j.at("weights");
    lstm_from_json(w.at("enc1"), m.weights.enc1);
    lstm_from_json(w.at("enc2"), m.weights.enc2);
    lstm_from_json(w.at("dec1"), m.weights.dec1);
    lstm_from_json(w.at("dec2"), m.weights.dec2);
    tensor_from_json(w.at("head_w"), m.weights.head_w);
    tensor_from_json(w.at("head_b"), m.weights.head_b);
    m.check();
    return m;
  } catch (const ordered_json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  } catch (const ValidationError& e) {
    throw FormatError(std::string("invalid model file: ") + e.what());
  } catch (const ShapeMismatch& e) {
    throw FormatError(std::string("invalid model file: ") + e.what());
  }
}

void save_model(const EncoderDecoderModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file " + path);
  out << model_to_json(model) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

EncoderDecoderModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace pedtwin

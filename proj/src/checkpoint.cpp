#include "tcdst/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tcdst/error.hpp"

namespace tcdst {

using json = nlohmann::json;

template <class T>
Model<T> make_model(const Schema& schema, const Vocabulary& vocab,
                    Variant variant, EncoderConfig cfg,
                    std::size_t history_window, std::uint64_t seed) {
  Model<T> m;
  m.variant = variant;
  cfg.vocab_size = vocab.size();
  cfg.seed = seed;
  m.cfg = cfg;
  m.weights = make_loss_weights(schema);
  m.history_window = history_window;
  m.schema = schema;
  m.vocab = vocab;
  m.seed = seed;
  register_model_params(m.store, m.cfg, schema, vocab, variant);
  m.adam = AdamState<T>::make(m.store, T(1e-4));
  return m;
}

namespace {

json encoder_to_json(const EncoderConfig& c) {
  return json{{"num_layers", c.num_layers},   {"hidden_size", c.hidden_size},
              {"num_heads", c.num_heads},     {"ffn_size", c.ffn_size},
              {"max_len", c.max_len},         {"vocab_size", c.vocab_size},
              {"dropout_rate", c.dropout_rate}, {"seed", c.seed}};
}

EncoderConfig encoder_from_json(const json& j) {
  EncoderConfig c;
  c.num_layers = j.at("num_layers").get<std::size_t>();
  c.hidden_size = j.at("hidden_size").get<std::size_t>();
  c.num_heads = j.at("num_heads").get<std::size_t>();
  c.ffn_size = j.at("ffn_size").get<std::size_t>();
  c.max_len = j.at("max_len").get<std::size_t>();
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

template <class T>
void save_model(const std::string& path, const Model<T>& model) {
  json j;
  j["precision"] = sizeof(T) == 4 ? "f32" : "f64";
  j["variant"] = variant_name(model.variant);
  j["encoder"] = encoder_to_json(model.cfg);
  j["loss_weights"] = {{"alpha", model.weights.alpha},
                       {"beta_intent", model.weights.beta_intent},
                       {"beta_cat", model.weights.beta_cat},
                       {"alpha_joint", model.weights.alpha_joint}};
  j["history_window"] = model.history_window;
  j["seed"] = model.seed;
  j["schema"] = json::parse(model.schema.to_json());
  j["vocab"] = json::parse(model.vocab.to_json());

  json params = json::array();
  for (std::size_t i = 0; i < model.store.size(); ++i) {
    const auto& p = model.store.at(i);
    params.push_back(json{{"name", p.name},
                          {"rows", p.rows},
                          {"cols", p.cols},
                          {"values", p.values}});
  }
  j["params"] = std::move(params);

  json adam;
  adam["step_count"] = model.adam.step_count;
  adam["learning_rate"] = static_cast<double>(model.adam.learning_rate);
  adam["beta1"] = static_cast<double>(model.adam.beta1);
  adam["beta2"] = static_cast<double>(model.adam.beta2);
  adam["epsilon"] = static_cast<double>(model.adam.epsilon);
  adam["m"] = model.adam.m;
  adam["v"] = model.adam.v;
  j["adam"] = std::move(adam);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out << kCheckpointMagic << "\n" << j.dump() << "\n";
  if (!out) throw IoError("short write on checkpoint '" + path + "'");
}

namespace {

json read_checkpoint_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint '" + path + "'");
  std::string magic;
  std::getline(in, magic);
  if (magic != kCheckpointMagic)
    throw ValidationError("'" + path + "' is not a " +
                          std::string(kCheckpointMagic) + " checkpoint");
  std::stringstream rest;
  rest << in.rdbuf();
  try {
    return json::parse(rest.str());
  } catch (const json::exception& e) {
    throw ValidationError("checkpoint '" + path + "': " + e.what());
  }
}

}  // namespace

template <class T>
Model<T> load_model(const std::string& path) {
  json j = read_checkpoint_json(path);
  try {
    const std::string want = sizeof(T) == 4 ? "f32" : "f64";
    const std::string got = j.at("precision").get<std::string>();
    if (got != want)
      throw ValidationError("checkpoint precision is " + got + ", expected " +
                            want);
    Model<T> m;
    m.variant = variant_from_name(j.at("variant").get<std::string>());
    m.cfg = encoder_from_json(j.at("encoder"));
    m.weights.alpha = j.at("loss_weights").at("alpha").get<double>();
    m.weights.beta_intent = j.at("loss_weights").at("beta_intent").get<double>();
    m.weights.beta_cat = j.at("loss_weights").at("beta_cat").get<double>();
    m.weights.alpha_joint = j.at("loss_weights").at("alpha_joint").get<double>();
    m.history_window = j.at("history_window").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.schema = Schema::from_json(j.at("schema").dump());
    m.vocab = Vocabulary::from_json(j.at("vocab").dump());

    for (const auto& p : j.at("params"))
      m.store.add(p.at("name").get<std::string>(),
                  p.at("rows").get<std::size_t>(),
                  p.at("cols").get<std::size_t>(),
                  p.at("values").get<std::vector<T>>());

    const auto& a = j.at("adam");
    m.adam.step_count = a.at("step_count").get<std::int64_t>();
    m.adam.learning_rate = static_cast<T>(a.at("learning_rate").get<double>());
    m.adam.beta1 = static_cast<T>(a.at("beta1").get<double>());
    m.adam.beta2 = static_cast<T>(a.at("beta2").get<double>());
    m.adam.epsilon = static_cast<T>(a.at("epsilon").get<double>());
    m.adam.m = a.at("m").get<std::vector<std::vector<T>>>();
    m.adam.v = a.at("v").get<std::vector<std::vector<T>>>();
    if (m.adam.m.size() != m.store.size() || m.adam.v.size() != m.store.size())
      throw ValidationError("checkpoint optimizer state does not match params");
    return m;
  } catch (const json::exception& e) {
    throw ValidationError("checkpoint '" + path + "': " + e.what());
  }
}

std::string checkpoint_precision(const std::string& path) {
  json j = read_checkpoint_json(path);
  try {
    return j.at("precision").get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError("checkpoint '" + path + "': " + e.what());
  }
}

template Model<float> make_model<float>(const Schema&, const Vocabulary&,
                                        Variant, EncoderConfig, std::size_t,
                                        std::uint64_t);
template Model<double> make_model<double>(const Schema&, const Vocabulary&,
                                          Variant, EncoderConfig, std::size_t,
                                          std::uint64_t);
template void save_model<float>(const std::string&, const Model<float>&);
template void save_model<double>(const std::string&, const Model<double>&);
template Model<float> load_model<float>(const std::string&);
template Model<double> load_model<double>(const std::string&);

}  // namespace tcdst

#pragma once

#include <cstdint>
#include <string>

#include "tcdst/adam.hpp"
#include "tcdst/autodiff.hpp"
#include "tcdst/encoder.hpp"
#include "tcdst/heads.hpp"
#include "tcdst/input.hpp"
#include "tcdst/model.hpp"
#include "tcdst/schema.hpp"
#include "tcdst/vocab.hpp"

namespace tcdst {

inline constexpr const char* kCheckpointMagic = "TCDST1";

// Everything needed to resume training or run frozen inference.
template <class T>
struct Model {
  Variant variant = Variant::kBaseline;
  EncoderConfig cfg;
  LossWeights weights;
  std::size_t history_window = 1;
  Schema schema;
  Vocabulary vocab;
  ParamStore<T> store;
  AdamState<T> adam;
  std::uint64_t seed = 0;
};

// Fresh model: registers encoder and head parameters, applies the
// conditioning-token initialization, derives beta_cat from the schema.
template <class T>
Model<T> make_model(const Schema& schema, const Vocabulary& vocab,
                    Variant variant, EncoderConfig cfg,
                    std::size_t history_window, std::uint64_t seed);

template <class T>
void save_model(const std::string& path, const Model<T>& model);

template <class T>
Model<T> load_model(const std::string& path);

// Peeks at the stored precision field ("f32" or "f64").
std::string checkpoint_precision(const std::string& path);

}  // namespace tcdst

// Copyright 2026 The mtlb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mtlb/train/checkpoint.hpp"

#include <string>

#include "mtlb/core/binary_io.hpp"
#include "mtlb/core/errors.hpp"
#include "mtlb/core/kv_config.hpp"

namespace mtlb
{

namespace
{

constexpr char kMagic[4] = {'M', 'T', 'C', 'K'};

void put_optional_tensor(ByteWriter & w, const std::optional<Tensor> & t)
{
  w.put<std::uint8_t>(t ? 1 : 0);
  if (t) w.put_tensor(*t);
}

std::optional<Tensor> get_optional_tensor(ByteReader & r)
{
  const auto flag = r.get<std::uint8_t>();
  if (flag > 1) throw FormatError("checkpoint: bad optional flag");
  if (flag == 0) return std::nullopt;
  return r.get_tensor();
}

bool get_flag(ByteReader & r, const char * what)
{
  const auto v = r.get<std::uint8_t>();
  if (v > 1) throw FormatError(std::string("checkpoint: bad ") + what + " flag");
  return v == 1;
}

}  // namespace

const Checkpoint::TensorRecord * Checkpoint::find(std::string_view name) const
{
  for (const auto & t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

Checkpoint make_checkpoint(const MotionTransformer & model, const OptimizerState * optimizer)
{
  Checkpoint c;
  c.kind = CheckpointKind::Model;
  c.config = model.config();
  c.seed = model.seed();
  c.feature_reuse = model.has_feature_reuse();
  c.intentions = model.intentions().points;
  const auto & entries = model.store().entries();
  if (optimizer != nullptr && optimizer->m.size() != entries.size()) {
    throw StateError("make_checkpoint: optimizer state is not aligned with the model");
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Checkpoint::TensorRecord rec;
    rec.name = entries[i].name;
    rec.group = entries[i].group;
    rec.trainable = entries[i].trainable;
    rec.value = entries[i].value;
    if (optimizer != nullptr) {
      rec.m = optimizer->m[i];
      rec.v = optimizer->v[i];
    }
    c.tensors.push_back(std::move(rec));
  }
  if (optimizer != nullptr) {
    c.optimizer = optimizer->config;
    c.optimizer_step = optimizer->step;
  }
  return c;
}

Checkpoint oracle_checkpoint(const ModelConfig & config)
{
  config.validate();
  Checkpoint c;
  c.kind = CheckpointKind::Oracle;
  c.config = config;
  c.intentions = Tensor({0, 2});
  return c;
}

std::string encode_checkpoint(const Checkpoint & c)
{
  ByteWriter w;
  w.put_raw(std::string_view(kMagic, 4));
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint64_t>(c.tensors.size() + 1);

  ByteWriter head;
  head.put<std::uint8_t>(static_cast<std::uint8_t>(c.kind));
  head.put<std::uint64_t>(c.seed);
  head.put<std::uint8_t>(c.feature_reuse ? 1 : 0);
  KeyValueConfig kv;
  write_model_config(c.config, kv);
  head.put_string(kv.serialize());
  head.put_tensor(c.intentions);
  head.put<std::uint8_t>(c.optimizer ? 1 : 0);
  if (c.optimizer) {
    head.put<double>(c.optimizer->beta1);
    head.put<double>(c.optimizer->beta2);
    head.put<double>(c.optimizer->eps);
    head.put<double>(c.optimizer->weight_decay);
    head.put<std::uint64_t>(c.optimizer_step);
  }
  w.put<std::uint64_t>(head.bytes().size());
  w.put_raw(head.bytes());

  for (const auto & t : c.tensors) {
    ByteWriter rec;
    rec.put_string(t.name);
    rec.put<std::uint8_t>(static_cast<std::uint8_t>(t.group));
    rec.put<std::uint8_t>(t.trainable ? 1 : 0);
    rec.put_tensor(t.value);
    put_optional_tensor(rec, t.m);
    put_optional_tensor(rec, t.v);
    w.put<std::uint64_t>(rec.bytes().size());
    w.put_raw(rec.bytes());
  }
  return w.take();
}

Checkpoint decode_checkpoint(std::string_view bytes)
{
  ByteReader r(bytes);
  if (bytes.size() < 16 || r.get_raw(4) != std::string_view(kMagic, 4)) {
    throw FormatError("not a checkpoint file (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint version " + std::to_string(version) + " is not supported");
  }
  const auto records = r.get<std::uint64_t>();
  if (records == 0) throw FormatError("checkpoint: missing header record");

  auto next_record = [&r]() {
    const auto len = r.get<std::uint64_t>();
    if (len > r.remaining()) throw FormatError("checkpoint: record length exceeds file size");
    return r.get_raw(static_cast<std::size_t>(len));
  };

  Checkpoint c;
  {
    ByteReader h(next_record());
    const auto kind = h.get<std::uint8_t>();
    if (kind > 1) throw FormatError("checkpoint: unknown kind " + std::to_string(kind));
    c.kind = static_cast<CheckpointKind>(kind);
    c.seed = h.get<std::uint64_t>();
    c.feature_reuse = get_flag(h, "feature-reuse");
    try {
      const auto kv = KeyValueConfig::parse(h.get_string());
      kv.reject_unknown(model_config_keys());
      c.config = model_config_from(kv);
      c.config.validate();
    } catch (const ConfigError & e) {
      throw FormatError(std::string("checkpoint: bad model config: ") + e.what());
    }
    c.intentions = h.get_tensor();
    if (get_flag(h, "optimizer")) {
      AdamWConfig a;
      a.beta1 = h.get<double>();
      a.beta2 = h.get<double>();
      a.eps = h.get<double>();
      a.weight_decay = h.get<double>();
      c.optimizer = a;
      c.optimizer_step = h.get<std::uint64_t>();
    }
    if (!h.done()) throw FormatError("checkpoint: trailing bytes in header");
  }
  for (std::uint64_t i = 1; i < records; ++i) {
    ByteReader t(next_record());
    Checkpoint::TensorRecord rec;
    rec.name = t.get_string();
    const auto group = t.get<std::uint8_t>();
    if (group > 2) throw FormatError("checkpoint: unknown group tag on '" + rec.name + "'");
    rec.group = static_cast<ParamGroup>(group);
    rec.trainable = get_flag(t, "trainable");
    rec.value = t.get_tensor();
    rec.m = get_optional_tensor(t);
    rec.v = get_optional_tensor(t);
    if ((rec.m && rec.m->shape() != rec.value.shape()) || (rec.v && rec.v->shape() != rec.value.shape())) {
      throw FormatError("checkpoint: moment shapes do not match '" + rec.name + "'");
    }
    if (!t.done()) throw FormatError("checkpoint: trailing bytes in record '" + rec.name + "'");
    c.tensors.push_back(std::move(rec));
  }
  if (!r.done()) throw FormatError("checkpoint: trailing bytes after the last record");
  return c;
}

void save_checkpoint(const std::string & path, const Checkpoint & checkpoint)
{
  write_file(path, encode_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::string & path) { return decode_checkpoint(read_file(path)); }

MotionTransformer restore_model(const Checkpoint & c, const std::optional<ModelConfig> & config)
{
  if (c.kind != CheckpointKind::Model) throw StateError("restore_model: an oracle checkpoint holds no model");
  MotionTransformer model(config.value_or(c.config), c.seed);
  if (c.feature_reuse) model.add_feature_reuse_blocks();
  auto & store = model.store();
  if (store.size() != c.tensors.size()) {
    throw DimensionError(
      "checkpoint holds " + std::to_string(c.tensors.size()) + " tensors but the model config registers " +
      std::to_string(store.size()));
  }
  for (std::size_t i = 0; i < c.tensors.size(); ++i) {
    const auto & rec = c.tensors[i];
    auto & e = store.entries()[i];
    if (e.name != rec.name) {
      throw DimensionError("checkpoint tensor #" + std::to_string(i) + " is '" + rec.name + "' but the model expects '" +
                           e.name + "'");
    }
    if (e.value.shape() != rec.value.shape()) {
      throw DimensionError("tensor '" + rec.name + "' has shape " + shape_to_string(rec.value.shape()) +
                           " in the checkpoint but " + shape_to_string(e.value.shape()) + " under the model config");
    }
    if (e.group != rec.group) throw FormatError("checkpoint: group tag of '" + rec.name + "' differs from the model");
    e.value = rec.value;
    e.trainable = rec.trainable;
  }
  model.set_intentions(IntentionSet{c.intentions});
  return model;
}

std::optional<OptimizerState> restore_optimizer(const Checkpoint & c, const ParameterStore & store)
{
  if (!c.optimizer) return std::nullopt;
  if (store.size() != c.tensors.size()) throw DimensionError("restore_optimizer: store and checkpoint differ in size");
  OptimizerState s;
  s.config = *c.optimizer;
  s.step = c.optimizer_step;
  for (const auto & rec : c.tensors) {
    s.m.push_back(rec.m.value_or(Tensor(rec.value.shape())));
    s.v.push_back(rec.v.value_or(Tensor(rec.value.shape())));
  }
  return s;
}

}  // namespace mtlb

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

#include "mtlb/report/run_config.hpp"

#include <algorithm>
#include <cstdlib>

#include "mtlb/core/errors.hpp"

namespace mtlb
{

std::vector<std::string> RunConfig::keys()
{
  std::vector<std::string> k{
    "data.source", "data.target",
    "generate.seed", "generate.preset", "generate.count", "generate.rate", "generate.duration", "generate.history",
    "train.epochs", "train.lr", "train.lr_policy", "train.lr_reference", "train.batch", "train.batch_reference",
    "train.beta1", "train.beta2", "train.eps", "train.weight_decay", "train.grad_clip",
    "run.method", "run.seed",
    "eval.split", "eval.step", "eval.threads",
    "study.parallel",
    "ingest.port", "ingest.reorder_window", "ingest.rate", "ingest.current_index", "ingest.focal_id",
    "ingest.idle_timeout", "ingest.max_scenarios"};
  for (auto & m : model_config_keys()) k.push_back(m);
  return k;
}

RunConfig RunConfig::from_kv(const KeyValueConfig & kv)
{
  kv.reject_unknown(keys());
  RunConfig c;
  c.source_path = kv.get_string("data.source", c.source_path);
  c.target_path = kv.get_string("data.target", c.target_path);

  c.generate.seed = kv.get_uint("generate.seed", c.generate.seed);
  if (auto p = kv.get("generate.preset")) c.generate.preset = preset_from_string(*p);
  c.generate.count = kv.get_uint("generate.count", c.generate.count);
  c.generate.sample_rate = kv.get_double("generate.rate", c.generate.sample_rate);
  c.generate.duration = kv.get_double("generate.duration", c.generate.duration);
  c.generate.history_steps = kv.get_uint("generate.history", c.generate.history_steps);

  c.model = model_config_from(kv);

  c.train.epochs = kv.get_uint("train.epochs", c.train.epochs);
  c.train.lr = kv.get_double("train.lr", c.train.lr);
  c.lr_policy = kv.get_string("train.lr_policy", c.lr_policy);
  c.lr_reference = kv.get_double("train.lr_reference", c.lr_reference);
  c.train.batch = kv.get_uint("train.batch", c.train.batch);
  c.batch_reference = kv.get_uint("train.batch_reference", c.batch_reference);
  c.train.adam.beta1 = kv.get_double("train.beta1", c.train.adam.beta1);
  c.train.adam.beta2 = kv.get_double("train.beta2", c.train.adam.beta2);
  c.train.adam.eps = kv.get_double("train.eps", c.train.adam.eps);
  c.train.adam.weight_decay = kv.get_double("train.weight_decay", c.train.adam.weight_decay);
  c.train.grad_clip = kv.get_double("train.grad_clip", c.train.grad_clip);

  if (auto m = kv.get("run.method")) c.method = method_from_string(*m);
  c.seed = kv.get_uint("run.seed", c.seed);

  if (auto s = kv.get("eval.split")) c.eval_split = split_from_string(*s);
  if (kv.has("eval.step")) c.eval_step = kv.get_uint("eval.step", 0);
  c.threads = kv.get_uint("eval.threads", c.threads);

  c.study_parallel = kv.get_bool("study.parallel", c.study_parallel);

  const auto port = kv.get_uint("ingest.port", c.ingest_port);
  if (port == 0 || port > 65535) throw ConfigError("ingest.port must be in 1..65535");
  c.ingest_port = static_cast<std::uint16_t>(port);
  c.ingest.reorder_window = kv.get_double("ingest.reorder_window", c.ingest.reorder_window);
  c.ingest.sample_rate = kv.get_double("ingest.rate", c.ingest.sample_rate);
  c.ingest.current_index = kv.get_uint("ingest.current_index", c.ingest.current_index);
  if (kv.has("ingest.focal_id")) c.ingest.focal_id = kv.get_int("ingest.focal_id", 0);
  c.ingest_idle_timeout = kv.get_double("ingest.idle_timeout", c.ingest_idle_timeout);
  c.ingest_max_scenarios = kv.get_uint("ingest.max_scenarios", c.ingest_max_scenarios);
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string & path) { return from_kv(KeyValueConfig::load(path)); }

KeyValueConfig RunConfig::to_kv() const
{
  KeyValueConfig kv;
  if (!source_path.empty()) kv.set("data.source", source_path);
  if (!target_path.empty()) kv.set("data.target", target_path);
  kv.set("generate.seed", std::to_string(generate.seed));
  kv.set("generate.preset", std::string(to_string(generate.preset)));
  kv.set("generate.count", std::to_string(generate.count));
  kv.set("generate.rate", format_double(generate.sample_rate));
  kv.set("generate.duration", format_double(generate.duration));
  kv.set("generate.history", std::to_string(generate.history_steps));
  write_model_config(model, kv);
  kv.set("train.epochs", std::to_string(train.epochs));
  kv.set("train.lr", format_double(train.lr));
  kv.set("train.lr_policy", lr_policy);
  kv.set("train.lr_reference", format_double(lr_reference));
  kv.set("train.batch", std::to_string(train.batch));
  kv.set("train.batch_reference", std::to_string(batch_reference));
  kv.set("train.beta1", format_double(train.adam.beta1));
  kv.set("train.beta2", format_double(train.adam.beta2));
  kv.set("train.eps", format_double(train.adam.eps));
  kv.set("train.weight_decay", format_double(train.adam.weight_decay));
  kv.set("train.grad_clip", format_double(train.grad_clip));
  kv.set("run.method", std::string(to_string(method)));
  kv.set("run.seed", std::to_string(seed));
  kv.set("eval.split", std::string(to_string(eval_split)));
  if (eval_step) kv.set("eval.step", std::to_string(*eval_step));
  kv.set("eval.threads", std::to_string(threads));
  kv.set("study.parallel", study_parallel ? "true" : "false");
  kv.set("ingest.port", std::to_string(ingest_port));
  kv.set("ingest.reorder_window", format_double(ingest.reorder_window));
  kv.set("ingest.rate", format_double(ingest.sample_rate));
  kv.set("ingest.current_index", std::to_string(ingest.current_index));
  if (ingest.focal_id) kv.set("ingest.focal_id", std::to_string(*ingest.focal_id));
  kv.set("ingest.idle_timeout", format_double(ingest_idle_timeout));
  kv.set("ingest.max_scenarios", std::to_string(ingest_max_scenarios));
  return kv;
}

void RunConfig::validate() const
{
  generate.validate();
  model.validate();
  if (lr_policy != "fixed" && lr_policy != "sqrt_batch") {
    throw ConfigError("train.lr_policy must be 'fixed' or 'sqrt_batch', got '" + lr_policy + "'");
  }
  if (batch_reference == 0) throw ConfigError("train.batch_reference must be positive");
  TrainConfig t = train;
  t.lr = effective_lr();
  t.validate();
  if (eval_step && *eval_step >= model.future_steps) throw ConfigError("eval.step must be below model.future");
  if (!(ingest.reorder_window >= 0.0)) throw ConfigError("ingest.reorder_window must be non-negative");
  if (!(ingest.sample_rate > 0.0)) throw ConfigError("ingest.rate must be positive");
  if (!(ingest_idle_timeout > 0.0)) throw ConfigError("ingest.idle_timeout must be positive");
}

double RunConfig::effective_lr() const
{
  if (lr_policy == "sqrt_batch") return scale_lr(lr_reference, batch_reference, train.batch);
  return train.lr;
}

std::size_t RunConfig::worker_threads() const
{
  const std::size_t cap = default_thread_count();
  if (threads == 0) return cap;
  return std::getenv("MTLB_THREADS") != nullptr ? std::min(threads, cap) : threads;
}

ExperimentSpec RunConfig::experiment(Method m) const
{
  ExperimentSpec spec;
  spec.method = m;
  spec.model = model;
  spec.train = train;
  spec.train.lr = effective_lr();
  spec.seed = seed;
  spec.eval.metrics.sample_rate = generate.sample_rate;
  spec.eval.metrics.eval_step = eval_step;
  spec.eval.threads = worker_threads();
  return spec;
}

}  // namespace mtlb

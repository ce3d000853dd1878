#pragma once

#include "marlens/net.hpp"
#include "marlens/params.hpp"
#include "marlens/scenario.hpp"

#include <stdexcept>
#include <string>

namespace marlens {

struct ConfigInvalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Algorithm { IQL, VDN, QMIX, IA2C, IPPO, MAA2C, MAPPO };

bool is_value_based(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);
std::string algorithm_to_string(Algorithm a);

/// Tuned per-(algorithm, sharing, environment family) defaults; see
/// default_hyperparams(). Every field can be overridden from a config
/// file.
struct HyperParams {
  int hidden_dim = 64;
  double lr = 3e-4;
  double gamma = 0.99;
  BodyKind net_type = BodyKind::GRU;
  bool reward_standardization = true;
  double max_grad_norm = 10.0;

  // value-based
  int batch_size = 32;
  int buffer_capacity = 5000; // episodes
  double eps_start = 1.0;
  double eps_end = 0.05;
  long eps_decay_steps = 50000;
  double evaluation_epsilon = 0.05;
  TargetUpdate target;

  // QMIX mixer
  int mixing_embed_dim = 32;
  int hypernet_dim = 64;
  int hypernet_layers = 2;

  // policy gradient
  double entropy_coef = 0.001;
  int n_step = 5;
  double ppo_clip = 0.2;
  int ppo_epochs = 4;
  int n_workers = 10;
};

HyperParams default_hyperparams(Algorithm alg, bool param_sharing, EnvKind env);

} // namespace marlens

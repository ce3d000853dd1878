#include "marlens/config.hpp"

namespace marlens {

bool is_value_based(Algorithm a) {
  return a == Algorithm::IQL || a == Algorithm::VDN || a == Algorithm::QMIX;
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "iql") return Algorithm::IQL;
  if (s == "vdn") return Algorithm::VDN;
  if (s == "qmix") return Algorithm::QMIX;
  if (s == "ia2c") return Algorithm::IA2C;
  if (s == "ippo") return Algorithm::IPPO;
  if (s == "maa2c") return Algorithm::MAA2C;
  if (s == "mappo") return Algorithm::MAPPO;
  throw ConfigInvalid("unknown algorithm: '" + s + "'");
}

std::string algorithm_to_string(Algorithm a) {
  switch (a) {
    case Algorithm::IQL: return "iql";
    case Algorithm::VDN: return "vdn";
    case Algorithm::QMIX: return "qmix";
    case Algorithm::IA2C: return "ia2c";
    case Algorithm::IPPO: return "ippo";
    case Algorithm::MAA2C: return "maa2c";
    case Algorithm::MAPPO: return "mappo";
  }
  return "?";
}

HyperParams default_hyperparams(Algorithm alg, bool ps, EnvKind env) {
  const bool lbf = env == EnvKind::LBF;
  HyperParams hp;
  switch (alg) {
    case Algorithm::IQL:
      hp.hidden_dim = ps ? 128 : 64;
      hp.lr = 3e-4;
      hp.net_type = BodyKind::GRU;
      hp.reward_standardization = true;
      hp.eps_decay_steps = ps ? 2000000 : 50000;
      hp.evaluation_epsilon = 0.05;
      hp.target = {TargetMode::Hard, 200, 0.01};
      break;
    case Algorithm::VDN:
      hp.hidden_dim = ps ? 128 : 64;
      hp.lr = ps ? 3e-4 : 1e-4;
      hp.net_type = BodyKind::GRU;
      hp.reward_standardization = true;
      hp.eps_decay_steps = ps ? 2000000 : 50000;
      hp.evaluation_epsilon = ps ? 0.0 : 0.05;
      hp.target = ps ? TargetUpdate{TargetMode::Soft, 200, 0.01}
                     : TargetUpdate{TargetMode::Hard, 200, 0.01};
      break;
    case Algorithm::QMIX:
      hp.hidden_dim = 64;
      hp.net_type = lbf ? BodyKind::GRU : BodyKind::FC;
      hp.lr = ps ? (lbf ? 3e-4 : 5e-4) : (lbf ? 1e-4 : 3e-4);
      hp.reward_standardization = true;
      hp.eps_decay_steps = ps ? 2000000 : 50000;
      hp.evaluation_epsilon = 0.05;
      hp.target = {TargetMode::Soft, 200, 0.01};
      break;
    case Algorithm::MAPPO:
    case Algorithm::IPPO: // tuned values published for the centralized variant
      hp.hidden_dim = 128;
      hp.lr = ps ? (lbf ? 3e-4 : 5e-4) : (lbf ? 1e-4 : 5e-4);
      hp.reward_standardization = false;
      hp.net_type = BodyKind::FC;
      hp.evaluation_epsilon = 0.05;
      hp.target = (!ps && lbf) ? TargetUpdate{TargetMode::Hard, 200, 0.01}
                               : TargetUpdate{TargetMode::Soft, 200, 0.01};
      hp.n_step = (ps && lbf) ? 5 : 10;
      break;
    case Algorithm::MAA2C:
    case Algorithm::IA2C: // likewise
      hp.hidden_dim = lbf ? 128 : 64;
      hp.lr = 5e-4;
      hp.reward_standardization = true;
      hp.net_type = lbf ? BodyKind::GRU : BodyKind::FC;
      hp.evaluation_epsilon = 0.01;
      hp.target = {TargetMode::Soft, 200, 0.01};
      hp.n_step = (ps && lbf) ? 10 : 5;
      break;
  }
  return hp;
}

} // namespace marlens

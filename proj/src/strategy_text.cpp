#include <string>
#include <string_view>

#include "stiffbvp/strategy.hpp"

namespace stiffbvp {

StrategyKind parse_strategy(std::string_view text) {
  if (text == "identity") return StrategyKind::Identity;
  if (text == "auto") return StrategyKind::Auto;
  if (text == "troesch-sp1fp2") return StrategyKind::TroeschSp1Fp2;
  if (text == "troesch-sp2-sp1fp2") return StrategyKind::TroeschSp2Sp1Fp2;
  throw ConfigError("unknown strategy '" + std::string(text) + "'");
}

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Identity:
      return "identity";
    case StrategyKind::Auto:
      return "auto";
    case StrategyKind::TroeschSp1Fp2:
      return "troesch-sp1fp2";
    case StrategyKind::TroeschSp2Sp1Fp2:
      return "troesch-sp2-sp1fp2";
  }
  return "?";
}

std::string to_string(StopCriterion stop) {
  switch (stop) {
    case StopCriterion::None:
      return "none";
    case StopCriterion::Accuracy:
      return "accuracy";
    case StopCriterion::Convergence:
      return "convergence";
  }
  return "?";
}

StopCriterion parse_stop(std::string_view text) {
  if (text == "accuracy") return StopCriterion::Accuracy;
  if (text == "convergence") return StopCriterion::Convergence;
  if (text == "none") return StopCriterion::None;
  throw ConfigError("unknown stop criterion '" + std::string(text) + "'");
}

}  // namespace stiffbvp

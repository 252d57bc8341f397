// Prints the equilibrium of a scenario file as the sensing cost varies,
// together with the realized-profit threshold where sensing starts to pay.

#include <iostream>

#include "cmvno/cmvno.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: regimes <scenario.json>\n";
    return 2;
  }
  try {
    const auto base = cmvno::load_scenario(argv[1]);
    const double c_l = base.costs().c_l;
    std::cout << "c_s,regime,b_s,expected_profit,baseline,alpha_th\n";
    for (double c_s = 0.25; c_s <= 1.5 * c_l; c_s += 0.05) {
      const auto s = base.with_costs(cmvno::CostParams::make(c_s, c_l));
      const auto d = cmvno::stage1_sense(s);
      std::cout << cmvno::format_number(c_s) << ',' << cmvno::to_string(d.regime) << ','
                << cmvno::format_number(d.b_s_star) << ',' << cmvno::format_number(d.expected_profit) << ','
                << cmvno::format_number(cmvno::baseline_outcome(s).profit) << ',';
      if (d.b_s_star > 0.0) std::cout << cmvno::format_number(cmvno::find_alpha_th(s, d));
      std::cout << '\n';
    }
  } catch (const cmvno::Error& e) {
    std::cerr << cmvno::to_string(e.kind()) << ": " << e.what() << '\n';
    return 2;
  }
}

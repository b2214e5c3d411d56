// pvedge-synth: emit a synthetic smart-meter month (plus matching schema)
// for demos and testing. The real field data this stands in for is private.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pvedge/synth.hpp"

int main(int argc, char** argv) {
  CLI::App app{"synthetic smart-meter data generator"};

  pvedge::SynthConfig config;
  std::string out = "synthetic.csv";
  std::string schema_out;
  app.add_option("--out", out, "output CSV path");
  app.add_option("--schema-out", schema_out, "also write a matching schema JSON");
  app.add_option("--days", config.days, "days of 15-minute data");
  app.add_option("--capacity", config.capacity_kva, "inverter rating, kVA");
  app.add_option("--seed", config.seed, "RNG seed");
  app.add_option("--missing", config.missing_fraction, "fraction of blanked cells");
  app.add_option("--corrupt", config.corrupt_fraction, "fraction of corrupted cells");
  app.add_flag("--extra-columns", config.extra_columns,
               "add freq and s_set_prev columns (12 features)");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto rows = pvedge::write_synthetic_csv(config, out);
    std::cout << "wrote " << rows << " rows to " << out << "\n";
    if (!schema_out.empty()) {
      pvedge::write_synthetic_schema(config, schema_out);
      std::cout << "wrote schema to " << schema_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

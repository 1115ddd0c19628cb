#pragma once

#include <string>
#include <vector>

#include "kmelia/driver.hpp"
#include "kmelia/model.hpp"
#include "kmelia/parser.hpp"

namespace support {

inline std::string corpus(const std::string& variant) { return std::string(KMELIA_CORPUS) + "/" + variant; }

struct Loaded {
  kmelia::ResolvedModel model;
  std::vector<kmelia::Diagnostic> diagnostics;
};

inline Loaded load(const std::vector<kmelia::SourceUnit>& units) {
  Loaded out;
  auto parsed = kmelia::parse_units(units, out.diagnostics);
  auto r = kmelia::resolve(parsed);
  out.model = std::move(r.model);
  out.diagnostics.insert(out.diagnostics.end(), r.diagnostics.begin(), r.diagnostics.end());
  return out;
}

inline Loaded load_variant(const std::string& variant) { return load(kmelia::load_sources({corpus(variant)})); }

inline kmelia::SourceUnit unit(const std::string& path, const std::string& text) {
  return {path, kmelia::classify_unit(text), text};
}

inline std::vector<const kmelia::Diagnostic*> with_code(const std::vector<kmelia::Diagnostic>& ds,
                                                        const std::string& code) {
  std::vector<const kmelia::Diagnostic*> out;
  for (const auto& d : ds)
    if (d.code == code) out.push_back(&d);
  return out;
}

inline kmelia::Report run_variant(const std::string& variant, std::vector<kmelia::Stage> phases = kmelia::all_stages(),
                                  int int_bound = 32) {
  kmelia::RunConfig cfg;
  cfg.inputs = {corpus(variant)};
  cfg.phases = std::move(phases);
  cfg.int_bound = int_bound;
  return kmelia::run(cfg);
}

inline std::vector<kmelia::Diagnostic> all_diagnostics(const kmelia::Report& r) {
  std::vector<kmelia::Diagnostic> out;
  for (const auto& p : r.phases) out.insert(out.end(), p.diagnostics.begin(), p.diagnostics.end());
  return out;
}

}  // namespace support

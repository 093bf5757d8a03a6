#pragma once

#include <fstream>
#include <iostream>

#include <json.hpp>

#include "fundeform/dictionary.hpp"

namespace fundeform {

/// Numeric run settings shared by the CLI subcommands. Values resolve with
/// precedence flag > config file > default; each value remembers its source
/// so the effective configuration can be echoed at startup.
struct RunConfig {
  struct Entry {
    double value = 0.0;
    std::string source = "default";
  };

  Entry k{200, "default"};
  Entry tau{1e-3, "default"};
  Entry tau_reg{1e-2, "default"};
  Entry tol{1e-8, "default"};
  Entry max_iter{50000, "default"};
  Entry iters{3, "default"};
  Entry seed{0, "default"};
  Entry dict_spectral{180, "default"};
  Entry dict_modal{180, "default"};
  Entry dict_handle{180, "default"};
  Entry handle_rotations{1, "default"};
  Entry handle_radius_factor{1.5, "default"};

  DictionarySpec dictionary_spec() const {
    DictionarySpec spec;
    spec.n_spectral = static_cast<Eigen::Index>(dict_spectral.value);
    spec.n_modal = static_cast<Eigen::Index>(dict_modal.value);
    spec.n_handle = static_cast<Eigen::Index>(dict_handle.value);
    spec.handle_rotations = handle_rotations.value != 0;
    spec.handle_radius_factor = handle_radius_factor.value;
    return spec;
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("config '" + path + "': " + e.what());
    }
    auto take = [&](nlohmann::json& obj, const char* key, Entry& entry) {
      if (obj.contains(key)) {
        entry.value = obj.at(key).get<double>();
        entry.source = "config";
        obj.erase(key);
      }
    };
    take(j, "k", k);
    take(j, "tau", tau);
    take(j, "tau_reg", tau_reg);
    take(j, "tol", tol);
    take(j, "max_iter", max_iter);
    take(j, "iters", iters);
    take(j, "seed", seed);
    if (j.contains("dictionary")) {
      nlohmann::json d = j.at("dictionary");
      take(d, "spectral", dict_spectral);
      take(d, "modal", dict_modal);
      take(d, "handle", dict_handle);
      take(d, "handle_rotations", handle_rotations);
      take(d, "handle_radius_factor", handle_radius_factor);
      if (!d.empty())
        throw ParseError("config '" + path + "': unknown dictionary key '" +
                         d.begin().key() + "'");
      j.erase("dictionary");
    }
    if (!j.empty())
      throw ParseError("config '" + path + "': unknown key '" + j.begin().key() + "'");
  }

  void echo(std::ostream& os) const {
    auto line = [&](const char* name, const Entry& e) {
      os << "config: " << name << " = " << e.value << " (" << e.source << ")\n";
    };
    line("k", k);
    line("tau", tau);
    line("tau_reg", tau_reg);
    line("tol", tol);
    line("max_iter", max_iter);
    line("iters", iters);
    line("seed", seed);
    line("dictionary.spectral", dict_spectral);
    line("dictionary.modal", dict_modal);
    line("dictionary.handle", dict_handle);
    line("dictionary.handle_rotations", handle_rotations);
    line("dictionary.handle_radius_factor", handle_radius_factor);
  }
};

}  // namespace fundeform

#include "copula_forge/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "copula_forge/errors.hpp"

namespace copula_forge {

using nlohmann::json;

namespace {

json net_to_json(const GeneratorNet& net) {
  const auto p = net.params();
  return json{{"hidden", net.arch().hidden_widths},
              {"leaky_slope", net.arch().leaky_slope},
              {"clamp", net.arch().clamp},
              {"params", std::vector<double>(p.begin(), p.end())}};
}

GeneratorNet net_from_json(const json& j) {
  NetArchitecture arch;
  arch.hidden_widths = j.at("hidden").get<std::vector<int>>();
  arch.leaky_slope = j.at("leaky_slope").get<double>();
  arch.clamp = j.at("clamp").get<double>();
  return GeneratorNet(arch, j.at("params").get<std::vector<double>>());
}

json generator_to_json(const GeneratorSpec& g) {
  if (const auto* net = std::get_if<GeneratorNet>(&g)) {
    json j = net_to_json(*net);
    j["type"] = "net";
    return j;
  }
  const auto& p = std::get<ParametricGenerator>(g);
  return json{{"type", "parametric"}, {"family", to_string(p.family())}, {"theta", p.theta()}};
}

GeneratorSpec generator_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "net") return net_from_json(j);
  if (type == "parametric")
    return ParametricGenerator(parse_family(j.at("family").get<std::string>()), j.at("theta").get<double>());
  throw IoError("model file: unknown generator type '" + type + "'");
}

json latent_to_json(const LatentCounts& l) { return json{{"train", l.train}, {"eval", l.eval}}; }

LatentCounts latent_from_json(const json& j) {
  return LatentCounts{j.at("train").get<std::size_t>(), j.at("eval").get<std::size_t>()};
}

}  // namespace

std::string model_to_json(const ModelSpec& spec) {
  json j{{"format", kModelFormat}, {"version", kModelVersion}};
  if (const auto* ac = std::get_if<AcSpec>(&spec)) {
    j["kind"] = "ac";
    j["dim"] = ac->dim;
    j["latent"] = latent_to_json(ac->latent);
    j["generator"] = generator_to_json(ac->generator);
  } else {
    const auto& hac = std::get<HacSpec>(spec);
    j["kind"] = "hac";
    j["dim"] = hac.dim();
    j["latent"] = latent_to_json(hac.latent);
    j["outer"] = generator_to_json(hac.outer);
    json children = json::array();
    for (const auto& c : hac.children)
      children.push_back(json{{"vars", c.vars},
                              {"mu_raw", c.sub.mu_raw},
                              {"beta_raw", c.sub.beta_raw},
                              {"jump_net", net_to_json(c.sub.jump_net)}});
    j["children"] = std::move(children);
  }
  return j.dump(1);
}

ModelSpec model_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("model file is not valid JSON (truncated or corrupt): ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", std::string()) != kModelFormat)
      throw IoError("not a copula-forge model file");
    const int version = j.at("version").get<int>();
    if (version != kModelVersion)
      throw IoError("unsupported model file version " + std::to_string(version) + " (this build reads version " +
                    std::to_string(kModelVersion) + ")");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "ac") {
      AcSpec ac{generator_from_json(j.at("generator")), j.at("dim").get<int>(), latent_from_json(j.at("latent"))};
      if (ac.dim < 2) throw IoError("model file: dimension must be >= 2");
      return ac;
    }
    if (kind == "hac") {
      HacSpec hac;
      hac.outer = generator_from_json(j.at("outer"));
      hac.latent = latent_from_json(j.at("latent"));
      for (const auto& c : j.at("children")) {
        HacChildSpec child;
        child.vars = c.at("vars").get<std::vector<int>>();
        child.sub.mu_raw = c.at("mu_raw").get<double>();
        child.sub.beta_raw = c.at("beta_raw").get<double>();
        child.sub.jump_net = net_from_json(c.at("jump_net"));
        hac.children.push_back(std::move(child));
      }
      if (hac.dim() != j.at("dim").get<int>()) throw IoError("model file: children do not match the dimension");
      return hac;
    }
    throw IoError("model file: unknown kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw IoError(std::string("model file is missing or has malformed fields: ") + e.what());
  } catch (const ContractError& e) {
    throw IoError(std::string("model file is inconsistent: ") + e.what());
  } catch (const DomainError& e) {
    throw IoError(std::string("model file holds invalid values: ") + e.what());
  }
}

void save_model(const std::string& path, const ModelSpec& spec) {
  const std::string text = model_to_json(spec);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    out << text << '\n';
    out.flush();
    if (!out) throw IoError("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot move model file into place at '" + path + "'");
  }
}

ModelSpec load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace copula_forge

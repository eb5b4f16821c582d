#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "copula_forge/errors.hpp"
#include "copula_forge/model_io.hpp"
#include "copula_forge/training.hpp"

using namespace copula_forge;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("copula_forge_" + name);
}

HacSpec sample_hac() {
  HacSpec h;
  h.outer = GeneratorNet::init(NetArchitecture{}, 1);
  h.children.push_back({SubordinatorSpec{0.25, -1.5, GeneratorNet::init(NetArchitecture{}, 2)}, {0, 2}});
  h.children.push_back({SubordinatorSpec{-0.1, 0.3, GeneratorNet::init(NetArchitecture{}, 3)}, {1, 3}});
  h.latent = {50, 400};
  return h;
}

}  // namespace

TEST(ModelIo, FlatRoundTripIsBitExact) {
  NetArchitecture arch;
  arch.hidden_widths = {7, 5};
  GeneratorNet net = GeneratorNet::init(arch, 4);
  net.params()[0] = 1.0 / 3.0;
  const AcSpec spec{net, 3, {100, 700}};
  const auto path = temp_file("flat.json");
  save_model(path.string(), spec);
  const ModelSpec back = load_model(path.string());
  std::filesystem::remove(path);
  ASSERT_TRUE(std::holds_alternative<AcSpec>(back));
  EXPECT_EQ(std::get<AcSpec>(back), spec);

  const Matrix data = AcModel(ParametricGenerator(Family::Clayton, 2.0), 3).sample(200, 1);
  const double a = nll(instantiate(spec, 700, 9), data);
  const double b = nll(instantiate(std::get<AcSpec>(back), 700, 9), data);
  EXPECT_EQ(a, b);
}

TEST(ModelIo, ParametricAndHierarchicalRoundTrip) {
  const AcSpec par{ParametricGenerator(Family::Joe, 2.75), 4, {}};
  EXPECT_EQ(std::get<AcSpec>(model_from_json(model_to_json(par))), par);
  const HacSpec hac = sample_hac();
  const ModelSpec back = model_from_json(model_to_json(hac));
  ASSERT_TRUE(std::holds_alternative<HacSpec>(back));
  EXPECT_EQ(std::get<HacSpec>(back), hac);
  const HacModel m1 = instantiate(hac, 300, 5), m2 = instantiate(std::get<HacSpec>(back), 300, 5);
  const std::vector<double> u = {0.3, 0.4, 0.5, 0.6};
  EXPECT_EQ(m1.cdf(u), m2.cdf(u));
}

TEST(ModelIo, TruncatedFileIsRejected) {
  const std::string text = model_to_json(sample_hac());
  for (std::size_t cut : {std::size_t{0}, std::size_t{10}, text.size() / 2, text.size() - 2})
    EXPECT_THROW(model_from_json(text.substr(0, cut)), IoError) << "cut " << cut;
  const auto path = temp_file("trunc.json");
  {
    std::ofstream out(path);
    out << text.substr(0, text.size() / 3);
  }
  EXPECT_THROW(load_model(path.string()), IoError);
  std::filesystem::remove(path);
  EXPECT_THROW(load_model(temp_file("does_not_exist.json").string()), IoError);
}

TEST(ModelIo, UnknownVersionAndFormat) {
  std::string text = model_to_json(AcSpec{ParametricGenerator(Family::Clayton, 1.0), 2, {}});
  const std::string tag = "\"version\": 1";
  const auto pos = text.find(tag);
  ASSERT_NE(pos, std::string::npos) << text;
  std::string future = text;
  future.replace(pos, tag.size(), "\"version\": 7");
  try {
    model_from_json(future);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("version 7"), std::string::npos) << e.what();
  }
  std::string foreign = text;
  foreign.replace(foreign.find(kModelFormat), std::string(kModelFormat).size(), "something-else");
  EXPECT_THROW(model_from_json(foreign), IoError);
  EXPECT_THROW(model_from_json("{\"format\":\"copula-forge-model\",\"version\":1}"), IoError);
}

TEST(ModelIo, SaveIntoMissingDirectoryFails) {
  EXPECT_THROW(save_model("/nonexistent/dir/model.json", AcSpec{ParametricGenerator(Family::Clayton, 1.0), 2, {}}),
               IoError);
}

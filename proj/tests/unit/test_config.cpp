// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The taidlab Authors

#include <string>

#include <gtest/gtest.h>

#include "taidlab/config.hpp"
#include "taidlab/error.hpp"

namespace taidlab {
namespace {

std::string config_error(std::string_view text) {
  try {
    ValidatedConfig cfg(ConfigDocument::parse(text, "t.cfg"));
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
    return e.what();
  }
  return "";
}

TEST(ConfigDocument, ParsesCommentsAndWhitespace) {
  const auto doc = ConfigDocument::parse(
      "# header\n\nseed = 4   # trailing\n  train.steps=10\nexperiment.name = a b\n", "x.cfg");
  ASSERT_NE(doc.find("seed"), nullptr);
  EXPECT_EQ(doc.find("seed")->value, "4");
  EXPECT_EQ(doc.find("seed")->line, 3);
  EXPECT_EQ(doc.find("train.steps")->value, "10");
  EXPECT_EQ(doc.find("experiment.name")->value, "a b");
  EXPECT_EQ(doc.find("missing"), nullptr);
}

TEST(ConfigDocument, MalformedLinesNameTheLine) {
  for (std::string_view text : {"seed 4\n", "seed = 1\nseed = 2\n", "= 3\n", "bad key = 1\n"}) {
    try {
      ConfigDocument::parse(text, "f.cfg");
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kConfig);
      EXPECT_NE(std::string(e.what()).find("f.cfg:"), std::string::npos) << e.what();
    }
  }
}

TEST(ConfigDocument, CanonicalTextIsSortedAndOrderFree) {
  const auto a = ConfigDocument::parse("b = 2\na = 1\n");
  const auto b = ConfigDocument::parse("# c\na=1\n\nb   =   2\n");
  EXPECT_EQ(a.canonical_text(), "a = 1\nb = 2\n");
  EXPECT_EQ(a.canonical_text(), b.canonical_text());
}

TEST(ValidatedConfig, SchemaDiagnosticsNameLineAndKey) {
  std::string msg = config_error("seed = 1\ntrain.stepz = 3\n");
  EXPECT_NE(msg.find("t.cfg:2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("train.stepz"), std::string::npos) << msg;

  msg = config_error("train.steps = many\n");
  EXPECT_NE(msg.find("t.cfg:1"), std::string::npos) << msg;
  EXPECT_NE(msg.find("integer"), std::string::npos) << msg;

  msg = config_error("train.objective = KLD\n");
  EXPECT_NE(msg.find("TAID"), std::string::npos) << msg;

  EXPECT_NE(config_error("taid.alpha = nan\n"), "");
  EXPECT_NE(config_error("taid.adaptive = maybe\n"), "");
  EXPECT_NE(config_error("theory.y0 = 1, x\n"), "");
}

TEST(ValidatedConfig, SweepErrors) {
  EXPECT_NE(config_error("sweep.a = 1\n"), "");
  EXPECT_NE(config_error("sweep.a.nope = 1, 2\n"), "");
  EXPECT_NE(config_error("sweep.a.seed = 1, x\n"), "");
  EXPECT_NE(config_error("sweep.a.seed = 1, 2\nsweep.a.train.steps = 1\n"), "");
  EXPECT_NE(config_error("sweep.a.seed = 1\nsweep.b.seed = 2\n"), "");
  EXPECT_NE(config_error("sweep.a.theory.y0 = 1\n"), "");
}

TEST(ValidatedConfig, ExpandCartesianLastAxisFastest) {
  const ValidatedConfig cfg(ConfigDocument::parse(
      "sweep.obj.train.objective = KL, RKL\n"
      "sweep.size.teacher.order = 0, 1, 2\n"
      "sweep.size.teacher.contexts = 0, 0, 8\n"));
  ASSERT_EQ(cfg.axes().size(), 2u);
  EXPECT_EQ(cfg.axes()[0].name, "obj");
  const auto runs = cfg.expand();
  ASSERT_EQ(runs.size(), 6u);
  EXPECT_EQ(runs[0].at("train.objective"), "KL");
  EXPECT_EQ(runs[0].at("teacher.order"), "0");
  EXPECT_EQ(runs[2].at("teacher.order"), "2");
  EXPECT_EQ(runs[2].at("teacher.contexts"), "8");
  EXPECT_EQ(runs[3].at("train.objective"), "RKL");
  EXPECT_EQ(runs[3].at("teacher.order"), "0");
}

TEST(ValidatedConfig, NoAxesIsOneRunEmptyAxisIsNone) {
  EXPECT_EQ(ValidatedConfig(ConfigDocument::parse("seed = 1\n")).expand().size(), 1u);
  EXPECT_EQ(ValidatedConfig(ConfigDocument::parse("sweep.a.seed =\n")).expand().size(), 0u);
}

TEST(ValidatedConfig, ViewAppliesOverridesAndDefaults) {
  const ValidatedConfig cfg(ConfigDocument::parse("train.steps = 7\ntheory.y0 = 3, 4\n", "v.cfg"));
  const auto base = cfg.view();
  EXPECT_EQ(base.integer("train.steps"), 7);
  EXPECT_EQ(base.real("taid.alpha"), 5e-4);
  EXPECT_TRUE(base.boolean("taid.adaptive"));
  EXPECT_EQ(base.string("train.objective"), "KL");
  EXPECT_EQ(base.real_list("theory.y0"), (std::vector<double>{3.0, 4.0}));
  EXPECT_TRUE(base.is_set("train.steps"));
  EXPECT_FALSE(base.is_set("train.batch_size"));
  EXPECT_EQ(base.where("train.steps"), "v.cfg:1: train.steps: ");

  const std::map<std::string, std::string> over{{"train.steps", "9"}};
  const auto swept = cfg.view(&over);
  EXPECT_EQ(swept.integer("train.steps"), 9);
  EXPECT_NE(swept.where("train.steps").find("sweep value"), std::string::npos);
}

TEST(Schema, DefaultsPassTheirOwnChecks) {
  for (const auto& spec : experiment_schema()) {
    if (spec.type == ValueType::kRealList && spec.default_value.empty()) continue;
    EXPECT_FALSE(check_value(spec, spec.default_value).has_value()) << spec.key;
  }
  EXPECT_EQ(find_key_spec("nope"), nullptr);
}

}  // namespace
}  // namespace taidlab

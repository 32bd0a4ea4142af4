// Copyright 2026 The wkm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "generators.hpp"
#include "wkm/csv.hpp"
#include "wkm/data_model.hpp"
#include "wkm/error.hpp"
#include "wkm/simulation.hpp"

namespace wkm {
namespace {

using testing::record;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected wkm::Error";
  return ErrorCode::InvalidArgument;
}

TEST(Validate, MinimalRecord) {
  const auto data = Dataset::validate({record(1.0, 1, 1)});
  EXPECT_EQ(data.n(), 1u);
  EXPECT_EQ(data.p(), 1u);
  EXPECT_EQ(data.arm_size(Arm::Treated), 1u);
  EXPECT_EQ(data.event_count(Arm::Treated), 1u);
  EXPECT_EQ(data.arm_size(Arm::Control), 0u);
}

TEST(Validate, Errors) {
  EXPECT_EQ(code_of([] { Dataset::validate({}); }), ErrorCode::EmptyDataset);
  EXPECT_EQ(code_of([] { Dataset::validate({record(1, 1, 1), record(1, 1, 0)}); }),
            ErrorCode::TiedFailureTimes);
  EXPECT_EQ(code_of([] {
              auto r = record(1, 1, 1);
              r.covariates = {0.5, 1.0};
              Dataset::validate({r});
            }),
            ErrorCode::MissingInterceptColumn);
  EXPECT_EQ(code_of([] { Dataset::validate({record(1, 1, 1, {0.1}), record(2, 0, 0)}); }),
            ErrorCode::InconsistentCovariateLength);
  EXPECT_EQ(code_of([] { Dataset::validate({record(-1, 1, 1)}); }), ErrorCode::NegativeTime);
  EXPECT_EQ(code_of([] { Dataset::validate({record(NAN, 1, 1)}); }), ErrorCode::NegativeTime);
  EXPECT_EQ(code_of([] { Dataset::validate({record(1, 2, 1)}); }), ErrorCode::NonBinaryIndicator);
  EXPECT_EQ(code_of([] { Dataset::validate({record(1, 1, -1)}); }), ErrorCode::NonBinaryIndicator);
}

TEST(Validate, TieMessageListsTimes) {
  try {
    Dataset::validate({record(2.5, 1, 1), record(2.5, 1, 0), record(3, 1, 0)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("2.5"), std::string::npos);
  }
}

TEST(Validate, CensoringTiedWithFailureIsAllowed) {
  EXPECT_NO_THROW(Dataset::validate({record(1, 1, 1), record(1, 0, 1), record(1, 0, 0)}));
}

TEST(Validate, JitterBreaksTiesDeterministically) {
  const std::vector<SubjectRecord> records{record(2, 1, 1), record(1, 1, 0), record(2, 1, 0),
                                           record(4, 0, 1), record(2, 1, 1)};
  const auto a = Dataset::validate(records, {.jitter_ties = true});
  const auto b = Dataset::validate(records, {.jitter_ties = true});
  EXPECT_EQ(a, b);
  const double eps = 1e-9 * 4.0;
  EXPECT_EQ(a[0].time, 2.0);
  EXPECT_EQ(a[2].time, 2.0 + eps);
  EXPECT_EQ(a[4].time, 2.0 + 2.0 * eps);
  EXPECT_EQ(a[1].time, 1.0);
  EXPECT_EQ(a[3].time, 4.0);
}

TEST(Validate, Idempotent) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto data = testing::random_dataset(rng, 30, 2);
    const auto again = Dataset::validate({data.records().begin(), data.records().end()});
    EXPECT_EQ(data, again);
  }
}

TEST(Csv, DirectParsePrependsIntercept) {
  std::istringstream in("time,event,trt,z1\n1.0,1,1,0.3\n");
  const auto data = parse_csv(in, {.treatment = "trt"});
  ASSERT_EQ(data.n(), 1u);
  EXPECT_EQ(data[0].covariates, (std::vector<double>{1.0, 0.3}));
  EXPECT_EQ(data[0].time, 1.0);
  EXPECT_EQ(data[0].event, 1);
  EXPECT_EQ(data[0].treatment, 1);
}

TEST(Csv, ColumnSelectionAndOrder) {
  std::istringstream in("a,T,b,D,X\n1,2,3,1,0\n4,5,6,0,1\n");
  const auto data = parse_csv(in, {.time = "T", .event = "D", .treatment = "X",
                                   .covariates = {"b"}});
  EXPECT_EQ(data[1].covariates, (std::vector<double>{1.0, 6.0}));
  std::istringstream all("a,T,b,D,X\n1,2,3,1,0\n");
  const auto full = parse_csv(all, {.time = "T", .event = "D", .treatment = "X"});
  EXPECT_EQ(full[0].covariates, (std::vector<double>{1.0, 1.0, 3.0}));
}

TEST(Csv, Errors) {
  auto parse = [](const char* text) {
    std::istringstream in(text);
    return parse_csv(in);
  };
  EXPECT_EQ(code_of([&] { parse("time,event,treatment\n1,2,1\n"); }),
            ErrorCode::NonBinaryIndicator);
  EXPECT_EQ(code_of([&] { parse("time,event,treatment\n1,,1\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse("time,event,treatment\n1,abc,1\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse("time,event\n1,1\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse("time,event,treatment\n1,1\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { parse("time,event,treatment\n"); }), ErrorCode::EmptyDataset);
  EXPECT_EQ(code_of([&] { read_csv("/nonexistent/file.csv"); }), ErrorCode::FileNotFound);
}

TEST(Csv, ParseErrorNamesLineAndColumn) {
  std::istringstream in("time,event,treatment,z1\n1,1,1,0\n2,0,0,x\n");
  try {
    parse_csv(in);
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'z1'"), std::string::npos) << msg;
  }
}

// Property: read_csv . write_csv is the identity on simulated datasets.
TEST(Csv, RoundTripSimulatedDatasets) {
  const auto dir = std::filesystem::temp_directory_path() / "wkm_csv_roundtrip";
  std::filesystem::create_directories(dir);
  DgpConfig config;
  config.n = 60;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    config.beta0 = 0.02 * static_cast<double>(rep);
    const auto data = generate_sample(config, 99, rep);
    const auto path = dir / "sample.csv";
    write_csv(data, path);
    const auto back = read_csv(path);
    ASSERT_EQ(back.n(), data.n());
    for (std::size_t i = 0; i < data.n(); ++i) {
      EXPECT_NEAR(back[i].time, data[i].time, 1e-12 * std::max(1.0, data[i].time));
      EXPECT_EQ(back[i].event, data[i].event);
      EXPECT_EQ(back[i].treatment, data[i].treatment);
      ASSERT_EQ(back[i].covariates.size(), data[i].covariates.size());
      for (std::size_t j = 0; j < data.p(); ++j) {
        EXPECT_NEAR(back[i].covariates[j], data[i].covariates[j], 1e-12);
      }
    }
    // 17 significant digits reproduce doubles exactly
    EXPECT_EQ(back, data);
  }
  std::filesystem::remove_all(dir);
}

TEST(Format, ExactAndHuman) {
  EXPECT_EQ(format_exact(0.5), "0.5");
  EXPECT_EQ(format_exact(0.1), "0.10000000000000001");
  EXPECT_EQ(format_sig(0.123456, 4), "0.1235");
  EXPECT_EQ(std::stod(format_exact(M_PI)), M_PI);
}

}  // namespace
}  // namespace wkm

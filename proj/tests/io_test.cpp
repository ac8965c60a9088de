#include "smoothlasso/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>

#include "smoothlasso/simulation.hpp"
#include "test_util.hpp"

namespace smoothlasso {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(FormatDouble, RoundTrips) {
  testing::Gen g(81);
  for (int k = 0; k < 1000; ++k) {
    const double v = g.normal() * std::pow(10.0, g.integer(-300, 300));
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(-2.0), "-2");
}

TEST(DatasetCsv, RoundTripIsExact) {
  for (Index p : {3, 60}) {
    const TimeCourseDataset d = simulate_dataset(1, 40, p, 2.0, 7, 9);
    const TimeCourseDataset back = parse_dataset(dataset_to_csv(d));
    EXPECT_EQ(back.X, d.X);
    EXPECT_EQ(back.Y, d.Y);
    EXPECT_EQ(back.times, d.times);
    ASSERT_TRUE(back.truth.has_value());
    EXPECT_EQ(*back.truth, *d.truth);
  }
}

TEST(DatasetCsv, Layout) {
  TimeCourseDataset d;
  d.X = Matrix(2, 3);
  d.X << 1, 2, 3, 4, 5, 6;
  d.Y = Matrix(2, 2);
  d.Y << 0.5, 1.5, -0.5, 2.5;
  d.times = Vector(2);
  d.times << 0.0, 1.0;
  EXPECT_EQ(dataset_to_csv(d),
            "kind,index,time,c0,c1,c2\n"
            "x,0,,1,2,3\n"
            "x,1,,4,5,6\n"
            "y,0,0,0.5,-0.5\n"
            "y,1,1,1.5,2.5\n");
  const TimeCourseDataset back = parse_dataset(dataset_to_csv(d));
  EXPECT_FALSE(back.truth.has_value());
  EXPECT_EQ(back.Y, d.Y);
}

TEST(DatasetCsv, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "smoothlasso_io_test.csv";
  const TimeCourseDataset d = simulate_dataset(2, 20, 8, 1.0, 4, 10);
  save_dataset(d, path.string());
  const TimeCourseDataset back = load_dataset(path.string());
  EXPECT_EQ(back.Y, d.Y);
  std::filesystem::remove(path);
  EXPECT_EQ(code_of([&] { load_dataset(path.string()); }), ErrorCode::IoError);
}

TEST(DatasetCsv, ParseErrors) {
  const std::string header = "kind,index,time,c0,c1\n";
  EXPECT_EQ(code_of([] { parse_dataset(""); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_dataset("a,b,c\n"); }), ErrorCode::ParseError);
  const std::string bad_number = header + "x,0,,1,abc\nx,1,,2,3\ny,0,0,1,2\n";
  EXPECT_EQ(code_of([&] { parse_dataset(bad_number); }), ErrorCode::ParseError);
  EXPECT_NE(message_of([&] { parse_dataset(bad_number); }).find("line 2"), std::string::npos);
  const std::string short_y = header + "x,0,,1,4\nx,1,,2,3\ny,0,0,1\n";
  EXPECT_EQ(code_of([&] { parse_dataset(short_y); }), ErrorCode::ParseError);
  EXPECT_NE(message_of([&] { parse_dataset(short_y); }).find("line 4"), std::string::npos);
  const std::string empty_cell = header + "x,0,,1,\nx,1,,2,3\ny,0,0,1,2\n";
  EXPECT_NE(message_of([&] { parse_dataset(empty_cell); }).find("line 2"), std::string::npos);
  const std::string ragged_x = header + "x,0,,1,4\nx,1,,2\ny,0,0,1,2\n";
  EXPECT_EQ(code_of([&] { parse_dataset(ragged_x); }), ErrorCode::ParseError);
  const std::string non_finite = header + "x,0,,1,inf\nx,1,,2,3\ny,0,0,1,2\n";
  EXPECT_EQ(code_of([&] { parse_dataset(non_finite); }), ErrorCode::NonFinite);
  const std::string unknown = header + "z,0,,1,4\n";
  EXPECT_EQ(code_of([&] { parse_dataset(unknown); }), ErrorCode::ParseError);
  const std::string decreasing = header + "x,0,,1,4\nx,1,,2,3\ny,0,1,1,2\ny,1,0,1,2\n";
  EXPECT_EQ(code_of([&] { parse_dataset(decreasing); }), ErrorCode::DimensionMismatch);
}

TEST(ReportCsv, RoundTrip) {
  const std::vector<ReportRow> rows{{1, 1, 2.0, 50, 8, "mse_beta", 0.83, 0.25, 100},
                                    {4, 1, 2.0, 50, 8, "msize", 3.1234567890123457, std::nullopt, 1}};
  const std::string csv = report_to_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kReportHeader);
  EXPECT_NE(csv.find("4,1,2,50,8,msize,3.1234567890123457,,1\n"), std::string::npos);
  EXPECT_EQ(parse_report(csv), rows);
  EXPECT_THROW(parse_report("bad header\n"), Error);
  EXPECT_THROW(parse_report(std::string(kReportHeader) + "\n1,2,3\n"), Error);
}

TEST(ReportTable, RendersMeanAndSd) {
  const std::vector<ReportRow> rows{{1, 1, 2.0, 50, 8, "mse_beta", 0.834, 0.251, 100},
                                    {1, 1, 2.0, 50, 8, "fp", 2.5, std::nullopt, 1}};
  const std::string t = report_to_table(rows);
  EXPECT_NE(t.find("Model 1, n = 50, p = 8, sigma = 2"), std::string::npos);
  EXPECT_NE(t.find("0.83 (0.25)"), std::string::npos);
  EXPECT_NE(t.find("2.50"), std::string::npos);
}

TEST(TunedJson, RoundTrip) {
  TunedParams t;
  StageParams a;
  a.lambda = 1.25;
  a.bandwidth = 0.5;
  a.init_lambda = 3.0;
  a.mid_lambda = 2.0;
  a.validation_loss = 4.5;
  a.init_validation_loss = 5.5;
  StageParams b;
  b.lambda = 0.1;
  b.bandwidth = 0.0;
  b.init_lambda = 0.2;
  b.mid_lambda = 0.3;
  b.validation_loss = 1.0;
  b.init_validation_loss = 2.0;
  t.per_time = {a, b};
  const EstimatorSpec spec{7, 2.0, Kernel::Epanechnikov};
  const auto [spec2, t2] = tuned_from_json(nlohmann::json::parse(tuned_to_json(spec, t).dump()));
  EXPECT_EQ(spec2.id, 7);
  EXPECT_EQ(spec2.gamma, 2.0);
  EXPECT_EQ(spec2.kernel, Kernel::Epanechnikov);
  ASSERT_EQ(t2.per_time.size(), 2u);
  EXPECT_EQ(t2.per_time[0], a);
  EXPECT_EQ(t2.per_time[1], b);
  EXPECT_EQ(code_of([] { tuned_from_json(nlohmann::json::object()); }), ErrorCode::ParseError);
}

TEST(CoefficientsCsv, RawScaleRows) {
  TimeCourseFit f;
  f.spec = EstimatorSpec{4};
  LassoFit l;
  l.coefficients = Vector(2);
  l.coefficients << 2.0, 0.0;
  l.intercept = 1.0;
  f.fits = {l};
  f.column_scales = Vector::Constant(2, 2.0);
  f.column_centers = Vector::Constant(2, 1.0);
  Vector times(1);
  times << 0.25;
  EXPECT_EQ(coefficients_to_csv({f}, times), "estimator,index,time,intercept,c0,c1\n4,0,0.25,0,1,0\n");
}

}  // namespace
}  // namespace smoothlasso

#include <gtest/gtest.h>

#include <cstdio>

#include "isokit/verify.hpp"

using namespace isokit;

TEST(Verify, CaseRatioRules) {
    EXPECT_EQ(case_ratio(1.0, kInf), 0.0);
    EXPECT_DOUBLE_EQ(case_ratio(1.0, 4.0), 0.25);
    EXPECT_EQ(case_ratio(1e-13, 0.0, 1e-12), 0.0);
    EXPECT_TRUE(std::isinf(case_ratio(1.0, 0.0, 1e-12)));
    EXPECT_TRUE(std::isnan(case_ratio(std::nan(""), 1.0)));
}

TEST(Verify, JudgeRules) {
    CheckReport R;
    R.asserted_constant = 2.0;
    R.tolerance = 1e-9;
    EXPECT_TRUE(R.judge(2.0, 1.0));
    EXPECT_FALSE(R.judge(2.1, 1.0));
    EXPECT_TRUE(R.judge(5.0, kInf));
    CheckReport S;
    EXPECT_TRUE(S.judge(100.0, 1.0));
    EXPECT_FALSE(S.judge(1.0, 0.0));
}

TEST(Verify, EmptyReportIsValidJson) {
    CheckReport R;
    R.check_id = "none";
    auto j = to_json(R);
    EXPECT_EQ(j["schema_version"], "1");
    EXPECT_EQ(j["cases"].size(), 0u);
    EXPECT_EQ(j["summary"]["pass_count"], 0);
    EXPECT_TRUE(j["summary"]["asserted_constant"].is_null());
    auto back = report_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(back, R);
}

TEST(Verify, ReportRoundTripWithNonFinite) {
    CheckReport R;
    R.check_id = "x.y[z]";
    R.params = {{"seed", "42"}, {"space", "interval1d256"}};
    R.asserted_constant = 16.0;
    R.tolerance = 1e-9;
    R.add("a", 1.0, 2.0);
    R.add("b", 3.0, kInf);
    R.add("c", 1e-300, 0.0);
    std::string p = testing::TempDir() + "rep_rt.json";
    emit_report(R, p);
    auto Q = load_report(p);
    EXPECT_EQ(Q, R);
    EXPECT_EQ(Q.pass_count(), 3u);
    std::remove(p.c_str());
}

TEST(Verify, LoadReportErrors) {
    std::string p = testing::TempDir() + "rep_bad.json";
    write_text(p, "{not json");
    EXPECT_THROW(load_report(p), input_error);
    std::remove(p.c_str());
}

TEST(Verify, CorpusDeterministic) {
    auto S = interval_space(64);
    auto a = make_corpus(S, 42), b = make_corpus(S, 42), c = make_corpus(S, 43);
    EXPECT_EQ(a.functions, b.functions);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_NE(a.functions, c.functions);
    EXPECT_EQ(a.functions.size(), 100u);
    for (const auto& f : a.functions) EXPECT_EQ(f.size(), S.size());
}

TEST(Verify, OscillationSmall) {
    auto S = interval_space(128);
    auto C = make_corpus(S, 1, {6, 4, 4, 2});
    auto R = check_oscillation(C, lipschitz_profile(1));
    EXPECT_EQ(R.cases.size(), C.functions.size());
    EXPECT_TRUE(R.asserted_ok()) << R.max_ratio();
}

TEST(Verify, TrivialKNeverTightensReports) {
    // larger K on the right-hand side can only lower the ratios
    auto S = interval_space(32);
    auto C = make_corpus(S, 5, {4, 3, 2, 1});
    VerifyOptions o;
    o.k_solves = 2;
    o.k_iter = 40;
    auto full = check_main_theorems(C, SpaceDescriptor::lp(2), lipschitz_profile(1), o);
    o.trivial_k = true;
    auto triv = check_main_theorems(C, SpaceDescriptor::lp(2), lipschitz_profile(1), o);
    ASSERT_EQ(full.size(), triv.size());
    for (std::size_t r = 0; r < full.size(); ++r) {
        if (!full[r].asserted_constant) continue;
        EXPECT_LE(triv[r].max_ratio(), full[r].max_ratio() * (1 + 1e-9) + 1e-12) << full[r].check_id;
        EXPECT_GE(triv[r].pass_count(), full[r].pass_count()) << full[r].check_id;
    }
}

TEST(Verify, NegativeLorentzSuite) {
    VerifyOptions o;
    auto reps = run_suite("negative_lorentz", o);
    ASSERT_FALSE(reps.empty());
    for (const auto& r : reps) EXPECT_TRUE(r.asserted_ok()) << r.check_id;
    EXPECT_THROW(check_negative_lorentz(make_corpus(interval_space(16), 1), 2.0, 2.0, o), std::invalid_argument);
}

TEST(Verify, ChiBracketClosedForm) {
    double a = 0.25, s = -4, q = 2;
    double direct = std::sqrt(a * a * (std::pow(a, q / s - q) - 1) / (q - q / s));
    EXPECT_NEAR(chi_bracket_closed_form(a, s, q), direct, 1e-14);
}

TEST(Verify, UnknownSuite) {
    EXPECT_THROW(run_verify({"nope"}, VerifyOptions{}), std::invalid_argument);
}

TEST(Verify, ResultJsonShape) {
    VerifyOptions o;
    auto V = run_verify({"negative_lorentz"}, o);
    auto j = to_json(V);
    EXPECT_EQ(j["schema_version"], "1");
    EXPECT_EQ(j["seed"], 42);
    EXPECT_TRUE(j["ok"].get<bool>());
    EXPECT_EQ(j["reports"].size(), V.reports.size());
}

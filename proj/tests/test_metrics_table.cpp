#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <initializer_list>

// Published per-class precision/recall/F1 figures for the four learners at
// K = 5, 10, 15, 20. Frozen here as an arithmetic oracle: every printed F1
// must match the harmonic mean of its printed precision and recall, and
// every Average row must be the unweighted mean of its three class rows,
// both to within half a unit in the last printed digit (5e-4).

namespace {

struct ClassRow {
  double p, r, f1;
};

struct LearnerBlock {
  int k;
  const char* learner;
  ClassRow low, moderate, high, average;
};

const LearnerBlock kTable[] = {
    {5, "lr",
     {0.5032, 0.3719, 0.4277},
     {0.4618, 0.3293, 0.3844},
     {0.3593, 0.4902, 0.4147},
     {0.4414, 0.3971, 0.4089}},
    {5, "ann",
     {0.5195, 0.5593, 0.5387},
     {0.6294, 0.5412, 0.5820},
     {0.4201, 0.5414, 0.4731},
     {0.5230, 0.5473, 0.5312}},
    {5, "rf",
     {0.8857, 0.6500, 0.7497},
     {0.3854, 0.5282, 0.4457},
     {0.6721, 0.6374, 0.6543},
     {0.6477, 0.6052, 0.6165}},
    {5, "gb",
     {0.8999, 0.7215, 0.8009},
     {0.4453, 0.5009, 0.4715},
     {0.6912, 0.6987, 0.6949},
     {0.6788, 0.6404, 0.6558}},
    {10, "lr",
     {0.5035, 0.3680, 0.4252},
     {0.4627, 0.3344, 0.3882},
     {0.3585, 0.4838, 0.4118},
     {0.4416, 0.3954, 0.4084}},
    {10, "ann",
     {0.5793, 0.4947, 0.5337},
     {0.5467, 0.4632, 0.5015},
     {0.4399, 0.5813, 0.5008},
     {0.5220, 0.5131, 0.5120}},
    {10, "rf",
     {0.8179, 0.6657, 0.7340},
     {0.3547, 0.4229, 0.3858},
     {0.8425, 0.6250, 0.7177},
     {0.6717, 0.5712, 0.6125}},
    {10, "gb",
     {0.7767, 0.7138, 0.7439},
     {0.3707, 0.4509, 0.4069},
     {0.8759, 0.6797, 0.7654},
     {0.6744, 0.6148, 0.6387}},
    {15, "lr",
     {0.5152, 0.5083, 0.5118},
     {0.4087, 0.3560, 0.3805},
     {0.3615, 0.3367, 0.3487},
     {0.4285, 0.4003, 0.4136}},
    {15, "ann",
     {0.5813, 0.5818, 0.5815},
     {0.5173, 0.4430, 0.4772},
     {0.4890, 0.3655, 0.4184},
     {0.5292, 0.4634, 0.4924}},
    {15, "rf",
     {0.7824, 0.7326, 0.7567},
     {0.3520, 0.4253, 0.3852},
     {0.8399, 0.7010, 0.7642},
     {0.6581, 0.6196, 0.6354}},
    {15, "gb",
     {0.8143, 0.7224, 0.7656},
     {0.3700, 0.4351, 0.3999},
     {0.8855, 0.6529, 0.7516},
     {0.6899, 0.6035, 0.6390}},
    {20, "lr",
     {0.4773, 0.4677, 0.4725},
     {0.3326, 0.3332, 0.3329},
     {0.3928, 0.3865, 0.3896},
     {0.4009, 0.3958, 0.3983}},
    {20, "ann",
     {0.5002, 0.6018, 0.5463},
     {0.5661, 0.5756, 0.5708},
     {0.4607, 0.4034, 0.4302},
     {0.5090, 0.5269, 0.5158}},
    {20, "rf",
     {0.8039, 0.7480, 0.7749},
     {0.3478, 0.3898, 0.3676},
     {0.9274, 0.7133, 0.8064},
     {0.6930, 0.6170, 0.6496}},
    {20, "gb",
     {0.8223, 0.8124, 0.8173},
     {0.3944, 0.4389, 0.4155},
     {0.8580, 0.6011, 0.7069},
     {0.6916, 0.6175, 0.6466}},
};

constexpr double kTol = 5e-4;

double harmonic(double p, double r) {
  return p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
}

}  // namespace

TEST_CASE("every printed F1 is the harmonic mean of its P and R") {
  for (const auto& block : kTable) {
    for (const ClassRow* row : {&block.low, &block.moderate, &block.high}) {
      INFO("K=" << block.k << " learner=" << block.learner);
      CHECK(std::abs(harmonic(row->p, row->r) - row->f1) <= kTol);
    }
  }
}

TEST_CASE("every average row is the unweighted mean of its class rows") {
  for (const auto& block : kTable) {
    INFO("K=" << block.k << " learner=" << block.learner);
    const double mean_p = (block.low.p + block.moderate.p + block.high.p) / 3.0;
    const double mean_r = (block.low.r + block.moderate.r + block.high.r) / 3.0;
    const double mean_f = (block.low.f1 + block.moderate.f1 + block.high.f1) / 3.0;
    CHECK(std::abs(mean_p - block.average.p) <= kTol);
    CHECK(std::abs(mean_r - block.average.r) <= kTol);
    CHECK(std::abs(mean_f - block.average.f1) <= kTol);
  }
}

TEST_CASE("the fixture covers all sixteen learner blocks") {
  CHECK(sizeof(kTable) / sizeof(kTable[0]) == 16);
  int class_rows = 0;
  for (const auto& block : kTable) {
    (void)block;
    class_rows += 3;
  }
  CHECK(class_rows == 48);
}

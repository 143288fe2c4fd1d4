#pragma once

#include <string>
#include <vector>

#include "nerfocus/render.hpp"

namespace nerfocus {

struct SuiteResult {
    std::string name;
    bool pass = false;
    std::string detail;  // worst-case numbers, for the report table
};

// Oracle suites behind the `verify` subcommand. `tol_scale` multiplies every
// tolerance; it exists as a failure-injection hook (a value near zero must
// make healthy code fail) and defaults to 1.
SuiteResult verify_ipe(double tol_scale = 1.0);
SuiteResult verify_moments(double tol_scale = 1.0);
SuiteResult verify_lens(double tol_scale = 1.0);
SuiteResult verify_composite(double tol_scale = 1.0);
SuiteResult verify_gradients(double tol_scale = 1.0);
SuiteResult verify_oracle(double tol_scale = 1.0);

// Runs the selected suite ("ipe", "moments", "lens", "composite", "grad",
// "oracle") or all of them when `suite` is empty. Throws
// std::invalid_argument on an unknown name.
std::vector<SuiteResult> run_verify(const std::string& suite = "",
                                    double tol_scale = 1.0);

// Smooth closed-form field evaluated at the frustum mean; the quadrature
// reference for the compositing check and a fixture for renderer tests.
class AnalyticField : public FrustumField {
 public:
    explicit AnalyticField(double density_scale = 2.0)
        : density_scale_(density_scale) {}
    FieldOutput eval(const FrustumGaussian& g, const Vec3& dir) const override {
        return eval_point(g.mean, dir);
    }
    FieldOutput eval_point(const Vec3& p, const Vec3& dir) const;

 private:
    double density_scale_;
};

// Front-facing camera at (0, 0, distance) looking down the world -z axis;
// the pose the two-planes defocus checks are defined on.
Camera canonical_front_camera(int size, double distance, double near, double far,
                              const LensConfig& lens);

}  // namespace nerfocus

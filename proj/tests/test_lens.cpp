#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "nerfocus/lens.hpp"
#include "nerfocus/rng.hpp"

using namespace nerfocus;

TEST_CASE("image_distance matches f*l/(f+l) and validates inputs") {
    CHECK(image_distance(0.1, 4.0) == doctest::Approx(0.4 / 4.1).epsilon(1e-15));
    CHECK(image_distance(0.05, 0.05) == doctest::Approx(0.025));
    CHECK_THROWS_AS(image_distance(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(image_distance(0.1, -2.0), std::domain_error);
}

TEST_CASE("LensConfig::make computes l' and validates") {
    LensConfig lens = LensConfig::make(0.2, 0.1, 4.0, 0.004);
    CHECK(lens.image_dist == doctest::Approx(0.1 * 4.0 / 4.1).epsilon(1e-15));
    CHECK_THROWS_AS(LensConfig::make(-0.1, 0.1, 4.0, 0.004), std::domain_error);
    CHECK_THROWS_AS(LensConfig::make(0.1, 0.1, 4.0, 0.0), std::domain_error);

    SUBCASE("with_focus moves l but keeps the sensor plane") {
        LensConfig moved = lens.with_focus(2.5);
        CHECK(moved.focus == 2.5);
        CHECK(moved.image_dist == lens.image_dist);
        CHECK_THROWS_AS(lens.with_focus(0.0), std::domain_error);
    }
    SUBCASE("with_aperture changes only A") {
        LensConfig wide = lens.with_aperture(0.5);
        CHECK(wide.aperture == 0.5);
        CHECK(wide.image_dist == lens.image_dist);
        CHECK_THROWS_AS(lens.with_aperture(-1e-9), std::domain_error);
    }
}

TEST_CASE("CoC diameter vanishes exactly on the focal plane") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        LensConfig lens = LensConfig::make(rng.uniform(0.01, 0.5), 0.1,
                                           rng.uniform(0.5, 8.0), 0.004);
        CHECK(coc_diameter_scene_point(lens, lens.focus) == 0.0);
        CHECK(bicone_diameter(lens, lens.focus) == 0.0);
    }
}

TEST_CASE("CoC grows away from the focal plane on either side") {
    LensConfig lens = LensConfig::make(0.2, 0.1, 4.0, 0.004);
    double prev = 0;
    for (double z = 4.0; z <= 8.0; z += 0.5) {
        double d = coc_diameter_scene_point(lens, z);
        CHECK(d >= prev);
        prev = d;
    }
    prev = 0;
    for (double z = 4.0; z >= 0.5; z -= 0.5) {
        double d = coc_diameter_scene_point(lens, z);
        CHECK(d >= prev);
        prev = d;
    }
    CHECK_THROWS_AS(coc_diameter_scene_point(lens, 0.0), std::domain_error);
}

TEST_CASE("bicone diameter hand values") {
    LensConfig lens = LensConfig::make(0.3, 0.1, 4.0, 0.004);
    // d_e(z) = |A (l - z) / l|: equals A/2 at z = l/2 and A at z = 2l.
    CHECK(bicone_diameter(lens, 2.0) == doctest::Approx(0.15));
    CHECK(bicone_diameter(lens, 8.0) == doctest::Approx(0.3));
}

TEST_CASE("axis-cone diameter is linear in depth and scale") {
    LensConfig lens = LensConfig::make(0.0, 0.1, 4.0, 0.004);
    double d1 = axis_cone_diameter(lens, 1.0, 1.0);
    CHECK(d1 == doctest::Approx(0.004 * 1.0 / lens.image_dist).epsilon(1e-15));
    CHECK(axis_cone_diameter(lens, 3.0, 1.0) == doctest::Approx(3 * d1));
    CHECK(axis_cone_diameter(lens, 1.0, 7.0) == doctest::Approx(7 * d1));
    // Fresh lens: equivalent closed form d0 * z * (f+l) / (f*l).
    CHECK(axis_cone_diameter(lens, 2.0, 1.0) ==
          doctest::Approx(0.004 * 2.0 * 4.1 / 0.4).epsilon(1e-12));
    CHECK_THROWS_AS(axis_cone_diameter(lens, -1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(axis_cone_diameter(lens, 1.0, 0.5), std::domain_error);
}

TEST_CASE("composite diameter is the sum of axis-cone and bicone terms") {
    Rng rng(6);
    for (int i = 0; i < 500; ++i) {
        LensConfig lens = LensConfig::make(rng.uniform(0.0, 0.4), 0.1,
                                           rng.uniform(0.5, 8.0),
                                           rng.uniform(0.001, 0.01));
        double z = rng.uniform(0.1, 10.0);
        double scale = 1.0 + rng.below(51);
        CHECK(composite_diameter(lens, z, scale) ==
              axis_cone_diameter(lens, z, scale) + bicone_diameter(lens, z));
    }
}

TEST_CASE("CompositeCone validates its axis and supports the defocus hook") {
    LensConfig lens = LensConfig::make(0.2, 0.1, 4.0, 0.004);
    Vec3 axis{0, 0, 1};
    CompositeCone cone({0, 0, -lens.image_dist}, {0, 0, 0}, axis, 1.0, lens, 1.0);
    CHECK(cone.diameter_at(2.0) ==
          doctest::Approx(composite_diameter(lens, 2.0, 1.0)));
    CompositeCone no_defocus = cone;
    no_defocus.defocus_disabled = true;
    CHECK(no_defocus.diameter_at(2.0) ==
          doctest::Approx(axis_cone_diameter(lens, 2.0, 1.0)));

    CHECK_THROWS_AS(CompositeCone({0, 0, -1}, {0, 0, 0}, {0, 0, 2}, 1.0, lens, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(CompositeCone({0, 0, -1}, {0, 0, 0}, {0, 0, 1}, 0.0, lens, 1.0),
                    std::invalid_argument);
}

TEST_CASE("partition_cone tiles depths and validates them") {
    LensConfig lens = LensConfig::make(0.0, 0.1, 4.0, 0.004);
    CompositeCone cone({0, 0, -lens.image_dist}, {0, 0, 0}, {0, 0, 1}, 1.0, lens, 1.0);
    std::vector<double> depths = {1.0, 2.0, 3.5, 5.0};
    auto frustums = partition_cone(cone, depths);
    REQUIRE(frustums.size() == 3);
    CHECK(frustums[0].z_near == 1.0);
    CHECK(frustums[2].z_far == 5.0);
    CHECK(frustums[1].t_near == doctest::Approx(2.0));  // cos_axis = 1

    CHECK_THROWS_AS(partition_cone(cone, std::vector<double>{1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(partition_cone(cone, std::vector<double>{1.0, 1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(partition_cone(cone, std::vector<double>{-1.0, 2.0}),
                    std::invalid_argument);
}

TEST_CASE("oblique cones convert depth to axis distance via cos_axis") {
    LensConfig lens = LensConfig::make(0.1, 0.1, 4.0, 0.004);
    Vec3 axis{0.6, 0.0, 0.8};
    CompositeCone cone({0, 0, -lens.image_dist / 0.8}, {0, 0, 0}, axis, 0.8, lens,
                       1.0);
    CHECK(cone.t_of_depth(2.0) == doctest::Approx(2.5));
    Vec3 p = cone.point_at_depth(2.0);
    CHECK(p.z == doctest::Approx(2.0));
}

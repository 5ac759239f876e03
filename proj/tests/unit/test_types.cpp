#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "dimseed/errors.hpp"
#include "dimseed/types.hpp"

using namespace dimseed;

TEST(Dimensions, MakeAcceptsPositiveValues) {
  const auto d = Dimensions::make(4.7, 1.8, 1.45);
  EXPECT_TRUE(d.valid());
  EXPECT_EQ(d.as_array()[1], 1.8);
}

TEST(Dimensions, MakeRejectsNonPositiveAndNonFinite) {
  EXPECT_THROW(Dimensions::make(0.0, 1.8, 1.4), NonPositiveDims);
  EXPECT_THROW(Dimensions::make(4.0, -1.0, 1.4), NonPositiveDims);
  EXPECT_THROW(Dimensions::make(4.0, 1.8, std::nan("")), NonPositiveDims);
  EXPECT_THROW(Dimensions::make(std::numeric_limits<double>::infinity(), 1.8, 1.4), NonPositiveDims);
}

TEST(Dimensions, WidthMayExceedLength) { EXPECT_NO_THROW(Dimensions::make(2.0, 4.0, 1.5)); }

TEST(VehicleTypeNames, StrictParseRoundTrips) {
  for (auto t : {VehicleType::sedan, VehicleType::suv, VehicleType::pickup_truck, VehicleType::van,
                 VehicleType::hatchback, VehicleType::other}) {
    EXPECT_EQ(parse_vehicle_type(to_string(t)), t);
  }
  EXPECT_THROW(parse_vehicle_type("SUV"), InvalidValue);
  EXPECT_THROW(parse_vehicle_type("coupe"), InvalidValue);
}

TEST(VehicleTypeNames, LooseLabelsFromModelOutput) {
  EXPECT_EQ(vehicle_type_from_label("SUV"), VehicleType::suv);
  EXPECT_EQ(vehicle_type_from_label("pickup truck"), VehicleType::pickup_truck);
  EXPECT_EQ(vehicle_type_from_label("Pickup Truck"), VehicleType::pickup_truck);
  EXPECT_EQ(vehicle_type_from_label("minivan"), VehicleType::van);
  EXPECT_EQ(vehicle_type_from_label("Hatchback"), VehicleType::hatchback);
  EXPECT_EQ(vehicle_type_from_label("spaceship"), std::nullopt);
}

TEST(VehicleTypeNames, DisplayNames) {
  EXPECT_EQ(display_name(VehicleType::pickup_truck), "Pickup Truck");
  EXPECT_EQ(display_name(VehicleType::suv), "SUV");
  EXPECT_EQ(k_main_vehicle_types.size(), 5u);
}

TEST(YearRange, Validation) {
  EXPECT_NO_THROW(YearRange::make(2013, 2018));
  EXPECT_NO_THROW(YearRange::make(2021, 2021));
  EXPECT_THROW(YearRange::make(2019, 2013), InvalidYearRange);
  EXPECT_THROW(YearRange::make(1899, 1950), InvalidYearRange);
  EXPECT_THROW(YearRange::make(2000, 2101), InvalidYearRange);
}

TEST(YearRange, OverlapAndFormatting) {
  const auto a = YearRange::make(2013, 2018);
  EXPECT_TRUE(a.overlaps(YearRange::make(2018, 2022)));
  EXPECT_FALSE(a.overlaps(YearRange::make(2019, 2022)));
  EXPECT_EQ(a.to_string(), "2013-2018");
  EXPECT_EQ(YearRange::make(2021, 2021).to_string(), "2021");
}

TEST(CameraCalibration, Validate) {
  CameraCalibration c;
  c.camera_id = "cam";
  c.fx = c.fy = 500;
  c.image_width = 640;
  c.image_height = 480;
  EXPECT_EQ(c.validate(), "");
  c.fx = 0;
  EXPECT_NE(c.validate(), "");
  c.fx = 500;
  c.rotation(0, 0) = 2.0;
  EXPECT_NE(c.validate(), "");
  c.rotation = Eigen::Matrix3d::Identity();
  c.image_height = 0;
  EXPECT_NE(c.validate(), "");
}

#pragma once

namespace btm {

// Low-precision solar geometry (declination + hour angle) and a zenith-cosine
// clear-sky model. Local clock time is taken as solar time. Azimuths are
// compass degrees: 90 = east, 180 = south, 270 = west.

double solar_declination_rad(int day_of_year);

// Cosine of the solar zenith angle at fractional local hour (0..24).
double cos_zenith(double latitude_deg, int day_of_year, double hour);

// Cosine of the beam incidence angle on a tilted panel; may be negative when
// the sun is behind the plane.
double cos_incidence(double latitude_deg, double tilt_deg, double azimuth_deg,
                     int day_of_year, double hour);

// Clear-sky plane-of-array output fraction in [0, 1] relative to rated
// capacity: exactly 0 whenever the sun is at or below the horizon.
double clear_sky_fraction(double latitude_deg, double tilt_deg, double azimuth_deg,
                          int day_of_year, double hour);

} // namespace btm

"""
Scoring predictions against labels
==================================

Waterline profiles are compared column by column (MAVD, in pixels);
depths frame by frame (MADDE, in meters).
"""

from draftread import WaterlineProfile, evaluate, madde, mavd

label = WaterlineProfile([10, 20, 30, None])
pred = WaterlineProfile([12, 20, 26, 31])
print("MAVD:", mavd(pred, label), "px (the column without a label is skipped)")

mean, std = madde([7.7, 8.1], [7.8, 8.0])
print(f"MADDE: {mean:.3f} +/- {std:.3f} m")

report = evaluate(
    ["f1", "f2", "f3"],
    [pred, label, label],
    [label, label, label],
    [7.7, 8.1, None],  # the third frame failed to read
    [7.8, 8.0, 7.9],
)
print(f"MAVD {report.mavd_mean:.3f} +/- {report.mavd_std:.3f} px, "
      f"MADDE {report.madde_mean:.3f} +/- {report.madde_std:.3f} m, "
      f"{report.failed_frames} failed frame(s), {report.excluded_columns} skipped column(s)")

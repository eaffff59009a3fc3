import numpy as np
from django.test import SimpleTestCase

from faces.axis import SymmetryAxis
from faces.exceptions import RectOutOfBoundsError, StitchGeometryError, UndefinedCorrelationError
from faces.imaging import GrayImage, Rect, fit_to, hflip
from faces.quality import assess
from faces.stitching import (
    Offset,
    StitchParams,
    StitchSide,
    choose_side,
    effective_levels,
    find_best_offset,
    multiband_blend,
    ncc,
    seam_mask,
    stitch_face,
)

from .fixtures import off_centre_face, quantized, smooth_texture, symmetric_face


class NccTestCase(SimpleTestCase):
    def test_self_and_negation(self):
        rng = np.random.default_rng(0)
        region = Rect(0, 0, 16, 16)
        for _ in range(100):
            img = GrayImage(rng.random((16, 16)))
            self.assertAlmostEqual(ncc(img, img, Offset(0, 0), region), 1.0, places=12)
            self.assertAlmostEqual(ncc(img, GrayImage(1.0 - img.pixels), Offset(0, 0), region), -1.0, places=12)

    def test_small_anticorrelated(self):
        w = GrayImage(np.array([[0, 0.5, 1], [0, 0.5, 1], [0, 0.5, 1]]))
        f = GrayImage(np.array([[1, 0.5, 0], [1, 0.5, 0], [1, 0.5, 0]]))
        self.assertAlmostEqual(ncc(w, f, Offset(0, 0), Rect(0, 0, 3, 3)), -1.0)

    def test_affine_invariance(self):
        rng = np.random.default_rng(1)
        w = GrayImage(rng.random((20, 20)))
        f = GrayImage(rng.random((20, 20)))
        region = Rect(2, 3, 10, 12)
        off = Offset(3, -2)
        reference = ncc(w, f, off, region)
        scaled = GrayImage(0.5 * f.pixels + 0.2)
        self.assertAlmostEqual(ncc(w, scaled, off, region), reference, places=10)

    def test_shifted_copy(self):
        pixels = np.random.default_rng(2).random((30, 30))
        w = GrayImage(pixels[5:25, 5:25])
        f = GrayImage(pixels)
        self.assertAlmostEqual(ncc(w, f, Offset(5, 5), Rect(0, 0, 20, 20)), 1.0)

    def test_out_of_bounds(self):
        img = GrayImage(np.random.default_rng(3).random((16, 16)))
        with self.assertRaises(RectOutOfBoundsError):
            ncc(img, img, Offset(0, 0), Rect(10, 10, 8, 8))
        with self.assertRaises(RectOutOfBoundsError):
            ncc(img, img, Offset(1, 0), Rect(0, 0, 16, 16))
        with self.assertRaises(RectOutOfBoundsError):
            ncc(img, img, Offset(0, -1), Rect(0, 0, 4, 4))

    def test_constant_operand(self):
        img = GrayImage(np.random.default_rng(4).random((8, 8)))
        with self.assertRaises(UndefinedCorrelationError):
            ncc(img, GrayImage.filled(8, 8, 0.3), Offset(0, 0), Rect(0, 0, 8, 8))


class FindBestOffsetTestCase(SimpleTestCase):
    def test_aligned_halves(self):
        x = smooth_texture(np.random.default_rng(5), 48, 64)
        offset, value = find_best_offset(GrayImage(x[:, :32]), GrayImage(x[:, 16:]), StitchParams())
        self.assertEqual(offset, Offset(0, 0))
        self.assertAlmostEqual(value, 1.0)

    def test_vertical_shift(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            x = smooth_texture(rng, 64, 64)
            j = int(rng.integers(-5, 6))
            right = np.roll(x, j, axis=0)[:, 16:]
            offset, value = find_best_offset(GrayImage(x[:, :32]), GrayImage(right), StitchParams())
            self.assertEqual(offset, Offset(0, j))
            self.assertAlmostEqual(value, 1.0)

    def test_horizontal_shift(self):
        x = smooth_texture(np.random.default_rng(7), 48, 64)
        for i in (-3, 3):
            with self.subTest(i=i):
                offset, _ = find_best_offset(GrayImage(x[:, :32]), GrayImage(x[:, 16 - i :]), StitchParams())
                self.assertEqual(offset, Offset(i, 0))

    def test_tie_prefers_zero_offset(self):
        columns = np.random.default_rng(8).random(64)
        x = np.tile(columns, (48, 1))
        offset, value = find_best_offset(GrayImage(x[:, :32]), GrayImage(x[:, 16:]), StitchParams())
        self.assertEqual(offset, Offset(0, 0))
        self.assertAlmostEqual(value, 1.0)

    def test_constant_bands(self):
        with self.assertRaises(UndefinedCorrelationError):
            find_best_offset(GrayImage.filled(32, 48, 0.5), GrayImage.filled(32, 48, 0.5), StitchParams())

    def test_geometry(self):
        img = GrayImage(np.random.default_rng(9).random((20, 32)))
        with self.assertRaises(StitchGeometryError):
            find_best_offset(img, img, StitchParams(search_radius=10))
        narrow = GrayImage(np.random.default_rng(10).random((48, 8)))
        with self.assertRaises(StitchGeometryError):
            find_best_offset(narrow, narrow, StitchParams(band_width=16))


class MultibandBlendTestCase(SimpleTestCase):
    def test_constant_is_preserved(self):
        flat = GrayImage.filled(20, 32, 0.3)
        out = multiband_blend(flat, flat, Offset(0, 0), StitchParams())
        self.assertEqual(out.shape, (32, 40))
        self.assertTrue(np.allclose(out.pixels, 0.3))

    def test_range(self):
        rng = np.random.default_rng(11)
        left, right = GrayImage(rng.random((32, 24))), GrayImage(rng.random((32, 24)))
        out = multiband_blend(left, right, Offset(2, -1), StitchParams())
        self.assertEqual(out.shape, (32, 46))
        self.assertGreaterEqual(out.pixels.min(), 0.0)
        self.assertLessEqual(out.pixels.max(), 1.0)

    def test_single_level_is_feathered_mix(self):
        rng = np.random.default_rng(12)
        left, right = rng.random((16, 20)), rng.random((16, 20))
        p = StitchParams(blend_levels=1, feather_width=6)
        out = multiband_blend(GrayImage(left), GrayImage(right), Offset(0, 0), p)

        mask = seam_mask(40, 16, 20, 6)
        expected = mask * np.hstack([left, left[:, ::-1]]) + (1 - mask) * np.hstack([right[:, ::-1], right])
        self.assertTrue(np.allclose(out.pixels, expected))

    def test_smooth_seam(self):
        height, width = 64, 96
        ys, xs = np.mgrid[0:height, 0:width]
        x = 0.2 + 0.6 * ys / height + 0.002 * np.sin(xs)
        out = multiband_blend(GrayImage(x[:, :48]), GrayImage(x[:, 48:]), Offset(0, 0), StitchParams())
        self.assertLess(float(np.mean((out.pixels - x) ** 2)), 1e-4)

    def test_seam_mask(self):
        mask = seam_mask(10, 2, 5, 2)
        self.assertEqual(mask.shape, (2, 10))
        self.assertTrue(np.allclose(mask[0, :4], 1.0))
        self.assertTrue(np.allclose(mask[0, 6:], 0.0))
        self.assertAlmostEqual(mask[0, 4], 0.75)
        self.assertAlmostEqual(mask[0, 5], 0.25)

    def test_effective_levels(self):
        self.assertEqual(effective_levels(4, 200, 180), 4)
        self.assertEqual(effective_levels(4, 20, 6), 2)
        self.assertEqual(effective_levels(3, 1, 1), 1)


class StitchFaceTestCase(SimpleTestCase):
    def test_symmetric_face_is_reproduced(self):
        face = symmetric_face(np.random.default_rng(13))
        outcome = stitch_face(face, SymmetryAxis.manual(90))
        self.assertEqual(outcome.offset, Offset(0, 0))
        self.assertAlmostEqual(outcome.peak_ncc, 1.0)
        self.assertEqual(outcome.image.shape, face.shape)
        self.assertTrue(np.allclose(outcome.image.pixels, face.pixels))

    def test_visible_left_half(self):
        face = symmetric_face(np.random.default_rng(14))
        pixels = face.pixels.copy()
        pixels[:, 90:] = 0.0
        outcome = stitch_face(GrayImage(pixels), SymmetryAxis.manual(90))
        self.assertEqual(outcome.side, StitchSide.LEFT)
        self.assertIsNone(outcome.peak_ncc)
        self.assertEqual(outcome.offset, Offset(0, 0))
        self.assertTrue(np.allclose(outcome.image.pixels, face.pixels))

    def test_visible_right_half(self):
        face = symmetric_face(np.random.default_rng(15))
        pixels = face.pixels.copy()
        pixels[:, :90] = 0.0
        outcome = stitch_face(GrayImage(pixels), SymmetryAxis.manual(90), side=StitchSide.RIGHT)
        self.assertEqual(outcome.side, StitchSide.RIGHT)
        self.assertTrue(np.allclose(outcome.image.pixels, face.pixels))

    def test_occluded_faces_quality(self):
        rng = np.random.default_rng(16)
        for _ in range(20):
            face = quantized(symmetric_face(rng).pixels)
            pixels = face.pixels.copy()
            pixels[:, 90:] = 0.0
            outcome = stitch_face(GrayImage(pixels), SymmetryAxis.manual(90))
            report = assess(face, quantized(outcome.image.pixels))
            self.assertGreaterEqual(report.cr, 0.99)
            self.assertLessEqual(report.mse, 15.0)

    def test_noisy_face_quality(self):
        rng = np.random.default_rng(17)
        face = symmetric_face(rng)
        noisy = GrayImage(np.clip(face.pixels + rng.normal(0.0, 0.004, face.shape), 0.0, 1.0))
        outcome = stitch_face(noisy, SymmetryAxis.manual(90), side=StitchSide.LEFT)
        self.assertEqual(outcome.offset, Offset(0, 0))
        report = assess(noisy, outcome.image)
        self.assertGreaterEqual(report.cr, 0.99)
        self.assertLessEqual(report.mse, 15.0)

    def test_axis_at_edge(self):
        face = symmetric_face(np.random.default_rng(19), height=40, width=40)
        with self.assertRaises(StitchGeometryError):
            stitch_face(face, SymmetryAxis.manual(0.5))
        with self.assertRaises(ValueError):
            stitch_face(face, SymmetryAxis.manual(45))

    def occluded(self, face, mode):
        pixels = face.pixels.copy()
        if mode == "right":
            pixels[:, 90:] = 0.0
            return GrayImage(pixels), StitchSide.LEFT, (0, 90)
        pixels[:, :90] = 0.0
        return GrayImage(pixels), StitchSide.RIGHT, (90, 180)

    def test_off_centre_axis_inside_visible_part(self):
        rng = np.random.default_rng(21)
        for column, mode, origin in ((86, "right", 0), (94, "left", 8)):
            with self.subTest(column=column, mode=mode):
                face = off_centre_face(rng, column)
                masked, side, visible = self.occluded(face, mode)
                outcome = stitch_face(masked, SymmetryAxis.manual(column), side=side, visible=visible)

                self.assertEqual(outcome.offset, Offset(0, 0))
                self.assertAlmostEqual(outcome.peak_ncc, 1.0)
                self.assertEqual(outcome.image.width, 172)
                self.assertEqual(outcome.origin, origin)
                report = assess(face, outcome.image, common_region=True, origin=outcome.origin)
                self.assertGreater(report.cr, 0.9999)
                self.assertLess(report.mse, 1e-6)

    def test_off_centre_axis_beyond_visible_part(self):
        rng = np.random.default_rng(22)
        for column, mode, origin, exact in ((94, "right", 0, (slice(0, 40), slice(150, 180))),
                                            (86, "left", -8, (slice(0, 30), slice(140, 180)))):
            with self.subTest(column=column, mode=mode):
                face = off_centre_face(rng, column)
                masked, side, visible = self.occluded(face, mode)
                outcome = stitch_face(masked, SymmetryAxis.manual(column), side=side, visible=visible)

                self.assertEqual(outcome.offset, Offset(-8, 0))
                self.assertIsNone(outcome.peak_ncc)
                self.assertEqual((outcome.image.width, outcome.origin), (188, origin))

                placed = fit_to(outcome.image, face.width, face.height, origin=outcome.origin)
                for columns in exact:
                    np.testing.assert_allclose(placed.pixels[:, columns], face.pixels[:, columns], atol=1e-9)
                # закрытые столбцы не попадают в результат
                self.assertGreater(placed.pixels[:, 86:98].mean(), 0.2)

    def test_invalid_visible_columns(self):
        face = symmetric_face(np.random.default_rng(23), height=40, width=40)
        for visible in ((0, 0), (10, 5), (0, 41)):
            with self.subTest(visible=visible), self.assertRaises(ValueError):
                stitch_face(face, SymmetryAxis.manual(20), side=StitchSide.LEFT, visible=visible)


class StitchParamsTestCase(SimpleTestCase):
    def test_validation(self):
        for kwargs in ({"search_radius": -1}, {"band_width": 1}, {"blend_levels": 0}, {"feather_width": 0}):
            with self.subTest(**kwargs), self.assertRaises(ValueError):
                StitchParams(**kwargs)

    def test_choose_side(self):
        pixels = np.zeros((4, 10))
        pixels[:, :5] = np.random.default_rng(20).random((4, 5))
        img = GrayImage(pixels)
        self.assertEqual(choose_side(img, 5), StitchSide.LEFT)
        self.assertEqual(choose_side(hflip(img), 5), StitchSide.RIGHT)
        self.assertEqual(choose_side(img, 3), StitchSide.RIGHT)
        self.assertEqual(choose_side(img, 7), StitchSide.LEFT)

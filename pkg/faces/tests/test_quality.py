import numpy as np
from django.test import SimpleTestCase

from faces.exceptions import DimensionMismatchError, UndefinedCorrelationError
from faces.imaging import GrayImage
from faces.quality import assess, cr, crop_to_common, mean_signed_error, mse


class QualityMetricsTestCase(SimpleTestCase):
    def setUp(self):
        rng = np.random.default_rng(0)
        self.a = GrayImage(rng.random((12, 10)))
        self.b = GrayImage(rng.random((12, 10)))
        self.c = GrayImage(rng.random((12, 10)))

    def test_mse_uses_8bit_scale(self):
        original = GrayImage(np.array([[0.0, 1.0]]) / 255.0)
        stitched = GrayImage(np.zeros((1, 2)))
        self.assertAlmostEqual(mse(original, stitched), 0.5)

    def test_mse_identity_and_symmetry(self):
        self.assertEqual(mse(self.a, self.a), 0.0)
        self.assertAlmostEqual(mse(self.a, self.b), mse(self.b, self.a))

    def test_mse_triangle_bound(self):
        ab, bc, ac = (np.sqrt(mse(x, y)) for x, y in ((self.a, self.b), (self.b, self.c), (self.a, self.c)))
        self.assertLessEqual(ac, ab + bc + 1e-12)

    def test_cr_anticorrelated_column(self):
        self.assertAlmostEqual(cr(GrayImage(np.array([[0.0], [1.0]])), GrayImage(np.array([[1.0], [0.0]]))), -1.0)

    def test_cr_affine_invariance(self):
        reference = cr(self.a, self.b)
        self.assertAlmostEqual(cr(self.a, GrayImage(0.4 * self.b.pixels + 0.3)), reference)
        self.assertAlmostEqual(cr(self.a, self.a), 1.0)

    def test_cr_constant(self):
        with self.assertRaises(UndefinedCorrelationError):
            cr(self.a, GrayImage.filled(10, 12, 0.5))

    def test_mean_signed_error(self):
        original = GrayImage.filled(4, 4, 0.6)
        stitched = GrayImage.filled(4, 4, 0.4)
        self.assertAlmostEqual(mean_signed_error(original, stitched), 51.0)
        self.assertAlmostEqual(mean_signed_error(stitched, original), -51.0)

    def test_dimension_mismatch(self):
        other = GrayImage(np.zeros((12, 11)))
        for metric in (mse, cr, mean_signed_error, assess):
            with self.subTest(metric=metric.__name__), self.assertRaises(DimensionMismatchError):
                metric(self.a, other)


class AssessTestCase(SimpleTestCase):
    def test_report(self):
        rng = np.random.default_rng(1)
        original = GrayImage(rng.random((8, 8)))
        stitched = GrayImage(np.clip(original.pixels + 0.01, 0.0, 1.0))
        report = assess(original, stitched)
        self.assertAlmostEqual(report.mse, mse(original, stitched))
        self.assertAlmostEqual(report.cr, cr(original, stitched))
        self.assertLess(report.mean_signed_error, 0.0)
        self.assertEqual(set(report.as_dict()), {"mse", "cr", "mean_signed_error"})

    def test_common_region(self):
        rng = np.random.default_rng(2)
        original = GrayImage(rng.random((10, 10)))
        wider = GrayImage(np.hstack([original.pixels, rng.random((10, 2))]))
        report = assess(original, wider, common_region=True)
        self.assertEqual(report.mse, 0.0)
        self.assertAlmostEqual(report.cr, 1.0)

        left, right = crop_to_common(original, wider)
        self.assertEqual(left.shape, right.shape)
        self.assertEqual(right.shape, (10, 10))

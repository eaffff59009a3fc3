import numpy as np
from django.test import SimpleTestCase

from faces.exceptions import EigensolverError
from faces.linalg import jacobi_eigh, off_diagonal_norm, round_robin


def random_symmetric(rng, size):
    a = rng.normal(size=(size, size))
    return (a + a.T) / 2.0


class RoundRobinTestCase(SimpleTestCase):
    def test_every_pair_once(self):
        for size in (2, 4, 6, 10):
            seen = set()
            for p, q in round_robin(size):
                indices = np.concatenate([p, q])
                self.assertEqual(len(set(indices.tolist())), size)
                seen.update(zip(p.tolist(), q.tolist()))
            self.assertEqual(len(seen), size * (size - 1) // 2)


class JacobiTestCase(SimpleTestCase):
    def test_matches_lapack(self):
        rng = np.random.default_rng(0)
        for size in range(1, 13):
            with self.subTest(size=size):
                matrix = random_symmetric(rng, size)
                values, vectors = jacobi_eigh(matrix)
                expected = np.sort(np.linalg.eigvalsh(matrix))[::-1]

                self.assertTrue(np.allclose(values, expected, atol=1e-8))
                self.assertTrue(np.all(np.diff(values) <= 0))
                self.assertTrue(np.allclose(vectors.T @ vectors, np.eye(size), atol=1e-10))
                self.assertTrue(np.allclose(vectors @ np.diag(values) @ vectors.T, matrix, atol=1e-8))

    def test_gram_matrix(self):
        rng = np.random.default_rng(1)
        data = rng.random((8, 30))
        centered = data - data.mean(axis=0)
        values, _ = jacobi_eigh(centered @ centered.T)
        self.assertAlmostEqual(values[-1], 0.0, places=8)
        self.assertTrue(np.all(values[:-1] > 0))

    def test_diagonal(self):
        values, vectors = jacobi_eigh(np.diag([1.0, 3.0, 2.0]))
        self.assertTrue(np.allclose(values, [3.0, 2.0, 1.0]))
        self.assertTrue(np.allclose(np.abs(vectors), np.eye(3)[:, [1, 2, 0]]))

    def test_sweep_limit(self):
        matrix = random_symmetric(np.random.default_rng(2), 6)
        with self.assertRaises(EigensolverError):
            jacobi_eigh(matrix, max_sweeps=0)

    def test_invalid_input(self):
        with self.assertRaises(ValueError):
            jacobi_eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))
        with self.assertRaises(ValueError):
            jacobi_eigh(np.ones((2, 3)))

    def test_off_diagonal_norm(self):
        self.assertAlmostEqual(off_diagonal_norm(np.array([[1.0, 2.0], [2.0, 1.0]])), np.sqrt(8.0))
        self.assertEqual(off_diagonal_norm(np.eye(4)), 0.0)

    def test_converges_on_gram_matrices_of_any_scale(self):
        rng = np.random.default_rng(3)
        for trial in range(300):
            count, d = rng.integers(2, 11), rng.integers(2, 21)
            data = rng.random((count, d)) * 10.0 ** rng.uniform(-3.0, 3.0)
            centered = data - data.mean(axis=0)
            gram = centered @ centered.T
            with self.subTest(trial=trial, count=count, d=d):
                values, vectors = jacobi_eigh(gram)
                scale = max(1.0, float(np.abs(values).max()))
                expected = np.sort(np.linalg.eigvalsh(gram))[::-1]
                self.assertLess(np.abs(values - expected).max(), 1e-8 * scale)
                self.assertLess(off_diagonal_norm(vectors.T @ gram @ vectors), 1e-9 * scale)

    def test_off_diagonal_norm_of_nearly_diagonal_matrix(self):
        a = np.diag([1e4, 1.0, 1e-2])
        a[0, 1] = a[1, 0] = 1e-11
        self.assertAlmostEqual(off_diagonal_norm(a), np.sqrt(2.0) * 1e-11, delta=1e-20)

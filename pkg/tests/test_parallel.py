import unittest

import szt.parallel


class chunk_bounds(unittest.TestCase):

    def test(self):
        self.assertEqual(szt.parallel.chunk_bounds(10, 4), [(0, 4), (4, 8), (8, 10)])
        self.assertEqual(szt.parallel.chunk_bounds(8, 4), [(0, 4), (4, 8)])
        self.assertEqual(szt.parallel.chunk_bounds(0, 4), list())


class map_chunks(unittest.TestCase):

    def test(self):
        func = lambda idx, start, stop: (idx, sum(range(start, stop)))
        expected = [(0, 6), (1, 22), (2, 17)]
        for threads in (1, 2, 8):
            with self.subTest(threads = threads):
                self.assertEqual(szt.parallel.map_chunks(func, 10, chunk_size = 4, threads = threads), expected)

    def test__error(self):

        def func(idx, start, stop):
            if idx == 1:
                raise ValueError(idx)
            return idx

        with self.assertRaises(ValueError):
            szt.parallel.map_chunks(func, 10, chunk_size = 4, threads = 2)

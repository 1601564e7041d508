import math
import unittest

import numpy as np

import szt.table
from szt.table import Table

from . import testsuite


class render_json(unittest.TestCase):

    def test(self):
        self.assertEqual(
            szt.table.render_json({'b': 0.1, 'a': float('inf')}),
            '{' '\n'
            '  "a": "inf",' '\n'
            '  "b": 0.10000000000000001' '\n'
            '}',
        )

    def test__non_finite(self):
        self.assertEqual(
            szt.table.render_json([float('nan'), -math.inf]),
            '[' '\n'
            '  "nan",' '\n'
            '  "-inf"' '\n'
            ']',
        )

    def test__numpy(self):
        self.assertEqual(
            szt.table.render_json(dict(counts = np.array([1, 2]), ok = np.bool_(True), p = np.float64(0.5))),
            '{' '\n'
            '  "counts": [' '\n'
            '    1,' '\n'
            '    2' '\n'
            '  ],' '\n'
            '  "ok": true,' '\n'
            '  "p": 0.5' '\n'
            '}',
        )

    def test__exact(self):
        value = 1 / 3
        self.assertEqual(float(szt.table.render_json(value)), value)

    @testsuite.with_temporary_paths(1)
    def test__dump_and_load(self, path):
        filepath = szt.table.dump_json(dict(x = 0.25, y = float('nan')), path / 'result.json')
        self.assertEqual(szt.table.load_json(filepath), dict(x = 0.25, y = 'nan'))


class Table__append(unittest.TestCase):

    def test(self):
        table = Table(columns = ['k', 'mse'])
        self.assertEqual(len(table), 0)
        table.append(k = 1.0, mse = 0.1)
        table.append(k = 2.0, mse = 0.2)
        self.assertEqual(table.columns, ['k', 'mse'])
        self.assertEqual(table.rows, [dict(k = 1.0, mse = 0.1), dict(k = 2.0, mse = 0.2)])
        self.assertEqual(table.column('mse'), [0.1, 0.2])

    def test__new_column(self):
        table = Table(columns = ['k', 'mse'])
        table.append(k = 1.0, mse = 0.1, scheme = 'szt')
        self.assertEqual(table.columns, ['k', 'mse', 'scheme'])

    def test__extend_empty(self):
        table = Table(columns = ['k'])
        self.assertIs(table.extend(list()), table)
        self.assertEqual(len(table), 0)


class Table__save(unittest.TestCase):

    @testsuite.with_temporary_paths(1)
    def test(self, path):
        table = Table([dict(check = 'entropy', value = 1 / 3, n = 3), dict(check = 'mse', value = 0.1, n = 4)])
        filepath = table.save(path / 'table.csv')
        self.assertEqual(
            filepath.read_text(),
            'check,value,n' '\n'
            'entropy,0.33333333333333331,3' '\n'
            'mse,0.10000000000000001,4' '\n',
        )
        loaded = Table.load(filepath)
        self.assertEqual(loaded.rows, table.rows)
        self.assertEqual(loaded, table)


class Table__concat(unittest.TestCase):

    def test(self):
        table1 = Table([dict(x = 1)])
        table2 = Table([dict(x = 2), dict(x = 3)])
        self.assertEqual(Table.concat([table1, table2]).column('x'), [1, 2, 3])
        labeled = Table.concat([table1, table2], labels = ['a', 'b'])
        self.assertEqual(labeled.columns, ['source', 'x'])
        self.assertEqual(labeled.column('source'), ['a', 'b', 'b'])

    def test__empty(self):
        self.assertEqual(len(Table.concat(list())), 0)


class Table__eq__(unittest.TestCase):

    def test(self):
        self.assertEqual(Table([dict(x = 1)]), Table([dict(x = 1)]))
        self.assertNotEqual(Table([dict(x = 1)]), Table([dict(x = 2)]))
        self.assertNotEqual(Table([dict(x = 1)]), [dict(x = 1)])

import os

import numpy as np
import pytest

from pysrc.errors import DataError
from pysrc.helpers.recdata.artifacts import (
    ITEM_IDS,
    NEGATIVES_TSV,
    SPLIT_JSON,
    TRAIN_CSR,
    TRAIN_TS,
    USER_IDS,
    load_split,
    read_csr,
    read_split_meta,
    save_split,
    write_csr,
)
from pysrc.helpers.recdata.loading import from_rows, load_interactions
from pysrc.helpers.recdata.splitting import (
    default_group_size,
    split_strong,
    split_weak,
    weak_validation,
)

from conftest import synthetic_rows, write_ratings


def write_lines(tmp_path, name, lines):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def row_sets(matrix):
    return [set(matrix.indices[matrix.indptr[u] : matrix.indptr[u + 1]].tolist()) for u in range(matrix.shape[0])]


class TestLoading:
    def test_duplicates_collapse(self, tmp_path):
        path = write_lines(tmp_path, "r.dat", ["1::10::5", "1::10::4", "2::11::3"])
        m = load_interactions(path)
        assert (m.n_users, m.n_items, m.nnz) == (2, 2, 2)
        assert m.raw_count == 3
        assert set(m.matrix.data) == {1.0}

    def test_csv_header_is_skipped(self, tmp_path):
        path = write_lines(tmp_path, "r.csv", ["user,item,rating", "1,10,5", "2,11,3", "2,12,1"])
        m = load_interactions(path, fmt="csv")
        assert (m.n_users, m.n_items, m.nnz) == (2, 3, 3)
        assert list(m.user_ids) == ["1", "2"]

    def test_named_header_with_text_ids(self, tmp_path):
        path = write_lines(tmp_path, "r.csv", ["userId,movieId", "abc,def", "abc,ghi", "xyz,def"])
        m = load_interactions(path, fmt="csv")
        assert (m.n_users, m.n_items, m.nnz) == (2, 2, 3)
        assert list(m.user_ids) == ["abc", "xyz"]
        assert "movieId" not in m.item_ids

    def test_tsv_with_timestamps(self, tmp_path):
        path = write_lines(tmp_path, "r.tsv", ["a\tx\t1\t30", "a\ty\t1\t10", "b\tx\t1\t20"])
        m = load_interactions(path, fmt="tsv")
        assert m.timestamps is not None
        np.testing.assert_array_equal(m.row_timestamps(0), [30.0, 10.0])

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = write_lines(tmp_path, "r.dat", ["1::10::5::100", "1::11::5::101", "2::12::oops::102"])
        with pytest.raises(DataError, match="line 3"):
            load_interactions(path)

    def test_missing_and_empty_files(self, tmp_path):
        with pytest.raises(DataError):
            load_interactions(str(tmp_path / "nope.dat"))
        empty = tmp_path / "empty.dat"
        empty.write_text("")
        with pytest.raises(DataError):
            load_interactions(str(empty))

    def test_unknown_format(self, ratings_file):
        with pytest.raises(DataError):
            load_interactions(ratings_file, fmt="parquet")

    def test_rating_threshold(self, tmp_path):
        path = write_lines(tmp_path, "r.dat", ["1::10::5::1", "1::11::2::2", "2::10::4::3"])
        m = load_interactions(path, rating_threshold=4)
        assert m.nnz == 2
        assert list(m.item_ids) == ["10"]

    def test_min_user_items_drops_users(self, tmp_path):
        path = write_lines(tmp_path, "r.dat", ["1::10::5::1", "1::11::5::2", "2::10::4::3"])
        m = load_interactions(path, min_user_items=2)
        assert m.n_users == 1
        assert m.dropped_users == 1

    def test_everything_filtered_is_an_error(self, tmp_path):
        path = write_lines(tmp_path, "r.dat", ["1::10::1::1"])
        with pytest.raises(DataError):
            load_interactions(path, rating_threshold=3)

    def test_synthetic_file(self, ratings_file):
        m = load_interactions(ratings_file)
        rows = synthetic_rows()
        assert m.n_users == len(rows)
        assert m.nnz == sum(len(r) for r in rows)


class TestWeakSplit:
    def test_latest_item_is_held_out(self):
        m = from_rows([[0, 1, 2], [1, 3]], 6, timestamps=[[1, 3, 2], [5, 4]])
        split = split_weak(m, n_negatives=2, seed=0)
        np.testing.assert_array_equal(split.test_items, [1, 1])
        assert row_sets(split.train.matrix) == [{0, 2}, {3}]

    def test_timestamp_ties_go_to_lowest_item(self):
        m = from_rows([[2, 4, 5]], 8, timestamps=[[7, 7, 1]])
        assert split_weak(m, n_negatives=1).test_items[0] == 2

    def test_negative_shortfall_is_recorded(self):
        m = from_rows([[0, 1, 2]], 5, timestamps=[[1, 2, 3]])
        split = split_weak(m, n_negatives=100, seed=0)
        assert len(split.negatives[0]) == 2
        assert split.shortfall == {0: 98}

    def test_single_item_users_are_excluded(self):
        m = from_rows([[0, 1], [3]], 6)
        split = split_weak(m, n_negatives=2, seed=0)
        assert list(split.users) == [0]
        assert split.excluded_users == 1
        assert row_sets(split.train.matrix)[1] == {3}

    def test_invariants_hold(self, ratings_file):
        m = load_interactions(ratings_file)
        split = split_weak(m, n_negatives=20, seed=3, holdout="random")
        rows = row_sets(split.train.matrix)
        for user, test_item, negs in zip(split.users, split.test_items, split.negatives):
            assert test_item not in rows[user]
            assert not set(negs.tolist()) & (rows[user] | {int(test_item)})
            assert len(set(negs.tolist())) == len(negs)
        assert split.train.nnz == m.nnz - len(split.users)

    def test_pure_function_of_seed(self, ratings_file):
        m = load_interactions(ratings_file)
        a = split_weak(m, n_negatives=10, seed=11, holdout="random")
        b = split_weak(m, n_negatives=10, seed=11, holdout="random")
        np.testing.assert_array_equal(a.test_items, b.test_items)
        for x, y in zip(a.negatives, b.negatives):
            np.testing.assert_array_equal(x, y)

    def test_validation_is_nested(self, ratings_file):
        split = split_weak(load_interactions(ratings_file), n_negatives=5, seed=0)
        val = weak_validation(split)
        assert val.seed == 1
        outer = row_sets(split.train.matrix)
        inner = row_sets(val.train.matrix)
        assert all(i <= o for i, o in zip(inner, outer))
        for user, item in zip(val.users, val.test_items):
            assert item in outer[user]

    def test_unknown_holdout_rule(self, toy_matrix):
        with pytest.raises(ValueError):
            split_weak(toy_matrix, holdout="oldest")


class TestStrongSplit:
    def test_foldin_counts(self):
        rows = [list(range(5))] * 6 + [[0, 1]] * 6
        m = from_rows(rows, 5)
        split = split_strong(m, n_val_users=3, n_test_users=3, foldin_ratio=0.8, seed=2)
        for group in split.groups.values():
            for k, user in enumerate(group.users):
                fold = group.foldin.indptr[k + 1] - group.foldin.indptr[k]
                held = group.heldout.indptr[k + 1] - group.heldout.indptr[k]
                expected = (4, 1) if len(rows[user]) == 5 else (1, 1)
                assert (fold, held) == expected

    def test_groups_partition_users(self, ratings_file):
        m = load_interactions(ratings_file)
        for seed in range(3):
            split = split_strong(m, seed=seed)
            val = set(split.groups["val"].users.tolist())
            test = set(split.groups["test"].users.tolist())
            train = set(split.train_users.tolist())
            assert not (val & test or val & train or test & train)
            assert val | test | train == set(range(m.n_users))
            assert len(val) == len(test) == default_group_size(m.n_users)

    def test_foldin_and_heldout_cover_the_row(self, ratings_file):
        m = load_interactions(ratings_file)
        split = split_strong(m, seed=4)
        full = row_sets(m.matrix)
        group = split.groups["test"]
        fold, held = row_sets(group.foldin), row_sets(group.heldout)
        for k, user in enumerate(group.users):
            assert fold[k] | held[k] == full[user]
            assert not fold[k] & held[k]
            assert held[k]

    def test_too_many_held_out_users(self, toy_matrix):
        with pytest.raises(DataError):
            split_strong(toy_matrix, n_val_users=3, n_test_users=2)

    def test_bad_ratio(self, toy_matrix):
        with pytest.raises(ValueError):
            split_strong(toy_matrix, foldin_ratio=1.0)

    def test_default_group_size(self):
        assert default_group_size(5) == 1
        assert default_group_size(6040) == 604
        assert default_group_size(10**6) == 10000


class TestArtifacts:
    def test_csr_file_layout(self, tmp_path, toy_matrix):
        path = str(tmp_path / "m.csr")
        write_csr(path, toy_matrix.matrix)
        raw = np.fromfile(path, dtype="<i8")
        assert list(raw[:3]) == [5, 7, toy_matrix.nnz]
        assert (read_csr(path) != toy_matrix.matrix).nnz == 0

    def test_truncated_csr(self, tmp_path, toy_matrix):
        path = tmp_path / "m.csr"
        write_csr(str(path), toy_matrix.matrix)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(DataError):
            read_csr(str(path))

    def test_weak_roundtrip(self, tmp_path, ratings_file):
        split = split_weak(load_interactions(ratings_file), n_negatives=10, seed=0)
        save_split(split, str(tmp_path), config={"seed": 0}, config_hash="abc")
        back = load_split(str(tmp_path))
        assert (back.train.matrix != split.train.matrix).nnz == 0
        np.testing.assert_array_equal(back.train.timestamps, split.train.timestamps)
        np.testing.assert_array_equal(back.users, split.users)
        np.testing.assert_array_equal(back.test_items, split.test_items)
        np.testing.assert_array_equal(back.train.user_ids, split.train.user_ids)
        np.testing.assert_array_equal(back.train.item_ids, split.train.item_ids)
        for x, y in zip(back.negatives, split.negatives):
            np.testing.assert_array_equal(x, y)
        assert read_split_meta(str(tmp_path))["config_hash"] == "abc"
        for name in (SPLIT_JSON, TRAIN_CSR, TRAIN_TS, NEGATIVES_TSV, USER_IDS, ITEM_IDS):
            assert os.path.isfile(tmp_path / name)

    def test_strong_roundtrip(self, tmp_path, ratings_file):
        split = split_strong(load_interactions(ratings_file), seed=0)
        save_split(split, str(tmp_path))
        back = load_split(str(tmp_path))
        np.testing.assert_array_equal(back.train_users, split.train_users)
        np.testing.assert_array_equal(back.train.user_ids, split.train.user_ids)
        for name, group in split.groups.items():
            np.testing.assert_array_equal(back.groups[name].users, group.users)
            assert (back.groups[name].foldin != group.foldin).nnz == 0
            assert (back.groups[name].heldout != group.heldout).nnz == 0

    def test_same_seed_gives_identical_files(self, tmp_path, ratings_file):
        m = load_interactions(ratings_file)
        a, b = tmp_path / "a", tmp_path / "b"
        save_split(split_weak(m, seed=5), str(a))
        save_split(split_weak(m, seed=5), str(b))
        for name in sorted(os.listdir(a)):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_raw_ids_survive_reload(self, tmp_path):
        path = tmp_path / "named.csv"
        path.write_text("user,item\nalice,x9\nalice,y7\nbob,x9\nbob,z3\ncarol,y7\ncarol,z3\n")
        split = split_weak(load_interactions(str(path), fmt="csv"), n_negatives=1, seed=0)
        save_split(split, str(tmp_path / "split"))
        back = load_split(str(tmp_path / "split"))
        assert list(back.train.user_ids) == ["alice", "bob", "carol"]
        assert list(back.train.item_ids) == ["x9", "y7", "z3"]

    def test_missing_id_file(self, tmp_path, toy_matrix):
        save_split(split_weak(toy_matrix, n_negatives=1, seed=0), str(tmp_path))
        os.remove(tmp_path / ITEM_IDS)
        with pytest.raises(DataError):
            load_split(str(tmp_path))

    def test_missing_split(self, tmp_path):
        with pytest.raises(DataError):
            load_split(str(tmp_path))

    def test_written_ratings_reload(self, tmp_path):
        path = write_ratings(tmp_path / "small.csv", [[0, 2], [1]], sep=",")
        m = load_interactions(path, fmt="csv")
        assert m.nnz == 3

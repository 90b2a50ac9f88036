import numpy as np
import pytest

from core.schema_model import Dimension, FactDescriptor, Hierarchy, WarehouseModel
from core.table_store import InstanceTable

N = None


def make_dimension(name, columns, rows, hierarchies, id_attribute=None):
    """Dimension whose attributes are exactly the table columns."""
    return Dimension(
        name=name,
        attributes=columns,
        id_attribute=id_attribute or columns[0],
        hierarchies=hierarchies,
        table=InstanceTable(columns, rows, name=name),
    )


def make_model(*dimensions, name="Test"):
    names = [d.name for d in dimensions]
    return WarehouseModel(name, dimensions, [FactDescriptor("Sales")], {"Sales": names})


def customer_dimension():
    columns = ["CustKey", "City", "State", "Country", "CityLabel", "StateName"]
    rows = [
        ["c1", "Paris", "IDF", "France", "paris-l", "Ile-de-France"],
        ["c2", "Paris", N, N, N, N],
        ["c3", "Lyon", "ARA", "France", "lyon-l", "Auvergne"],
        ["c4", "Lyon", N, "France", N, N],
        ["c5", "Nice", N, N, N, N],
    ]
    h = Hierarchy(
        "Geo",
        ["CustKey", "City", "State", "Country"],
        {"City": ["CityLabel"], "State": ["StateName"]},
    )
    return make_dimension("Customer", columns, rows, [h])


LEVELS = ["Key", "City", "Dept", "Region"]


def random_model(seed):
    """1-3 dimensions sharing geographic attribute names, small value pools, random nulls."""
    rng = np.random.default_rng(seed)
    dims = []
    for k in range(int(rng.integers(1, 4))):
        prefix = ["", "X_", "y_"][k]
        columns = [prefix + c for c in LEVELS] + [prefix + "CityName", prefix + "DeptName"]
        n = int(rng.integers(2, 60))
        pools = [int(rng.integers(1, 6)) for _ in range(5)]
        rows = []
        for i in range(n):
            row = [f"{k}-{i}"]
            for j, pool in enumerate(pools):
                row.append(f"v{j}-{int(rng.integers(0, pool))}")
            for j in range(1, len(row)):
                if rng.random() < 0.3:
                    row[j] = None
            rows.append(row)
        h = Hierarchy(
            "Geo",
            columns[:4],
            {columns[1]: [columns[4]], columns[2]: [columns[5]]},
        )
        dims.append(make_dimension(f"Dim{k}", columns, rows, [h]))
    return make_model(*dims)


@pytest.fixture
def geo_model():
    return make_model(customer_dimension())


@pytest.fixture
def two_dimension_model():
    customer = make_dimension(
        "Customer",
        ["C_Key", "C_City", "C_Region", "C_RegionName"],
        [
            ["k1", "Paris", N, N],
            ["k2", "Lyon", N, N],
            ["k3", "Nantes", N, N],
        ],
        [Hierarchy("Geo", ["C_Key", "C_City", "C_Region"], {"C_Region": ["C_RegionName"]})],
    )
    supplier = make_dimension(
        "Supplier",
        ["S_Key", "S_City", "S_Region", "S_RegionName"],
        [
            ["s1", "Lyon", "Rhone", "Rhone-Alpes"],
            ["s2", "Paris", "IDF", "Ile-de-France"],
            ["s3", "Brest", "Bretagne", "Bretagne"],
        ],
        [Hierarchy("Geo", ["S_Key", "S_City", "S_Region"], {"S_Region": ["S_RegionName"]})],
    )
    return make_model(customer, supplier)


@pytest.fixture
def schema_dir(tmp_path):
    """A schema file plus its CSV table on disk."""
    (tmp_path / "tables").mkdir()
    (tmp_path / "tables" / "customer.csv").write_text(
        "CustKey,City,State,Country,CityLabel,StateName\n"
        "c1,Paris,IDF,France,paris-l,Ile-de-France\n"
        "c2,Paris,,,,\n"
        "c3,Lyon,ARA,France,lyon-l,Auvergne\n"
        "c4,Lyon,,France,,\n"
        "c5,Nice,,,,\n",
        encoding="utf-8",
    )
    (tmp_path / "schema.json").write_text(
        """{
  "name": "Shop",
  "dimensions": [
    {
      "name": "Customer",
      "id": "CustKey",
      "attributes": ["CustKey", "City", "State", "Country", "CityLabel", "StateName"],
      "hierarchies": [
        {
          "name": "Geo",
          "parameters": ["CustKey", "City", "State", "Country"],
          "weak": {"City": ["CityLabel"], "State": ["StateName"]}
        }
      ],
      "table": "tables/customer.csv"
    }
  ],
  "facts": [{"name": "Sales", "dimensions": ["Customer"]}]
}
""",
        encoding="utf-8",
    )
    return tmp_path

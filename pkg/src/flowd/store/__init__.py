from flowd.store.instances import InstanceStore
from flowd.store.records import AppDatabase, Record

__all__ = ["AppDatabase", "InstanceStore", "Record"]

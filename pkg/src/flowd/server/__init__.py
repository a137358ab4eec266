from flowd.server.app import ApiConfig, create_app
from flowd.server.registry import AppRegistry

__all__ = ["ApiConfig", "AppRegistry", "create_app"]

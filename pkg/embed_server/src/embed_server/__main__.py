import uvicorn

from .app import create_app
from .model import Settings


def main() -> None:
    settings = Settings.from_env()
    uvicorn.run(create_app(settings), host="127.0.0.1", port=settings.port,
                log_level="warning")


if __name__ == "__main__":
    main()

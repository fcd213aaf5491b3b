# core/utils/observer.py
from typing import Any, Dict, List, Literal, Protocol

MessageType = Literal["status", "progress", "complete", "error"]


class Observer(Protocol):
    """Получатель сообщений о ходе развёртки и пакетных команд."""
    def update(self, message_type: MessageType, data: Dict[str, Any]):
        """
        :param message_type: "status", "progress", "complete" или "error".
        :param data: Для "progress": stage, current, total; для "error": stage, error.
        """
        ...


class Observable:
    def __init__(self):
        self._observers: List[Observer] = []

    def add_observer(self, observer: Observer):
        if observer not in self._observers:
            self._observers.append(observer)

    def remove_observer(self, observer: Observer):
        if observer in self._observers:
            self._observers.remove(observer)

    def notify_observers(self, message_type: MessageType, data: Dict[str, Any]):
        for observer in list(self._observers):
            observer.update(message_type, data)

    def report_progress(self, stage: str, current: int, total: int, **extra):
        self.notify_observers("progress", {"stage": stage, "current": current, "total": total, **extra})

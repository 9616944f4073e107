import logging
from concurrent.futures import ThreadPoolExecutor

logger = logging.getLogger(__name__)


class PoolUtils:

    @staticmethod
    def map_ordered(operation, items, threads=1, operation_name="operation"):
        """
        Apply ``operation`` to every item, optionally on a thread pool, and return the
        results in item order.

        Each item must carry everything the operation needs (including its own seed),
        so the output is identical for any thread count. NumPy releases the GIL inside
        its kernels, which is where chains and kernel rows spend their time.

        Args:
            operation (callable): Function of one item.
            items (iterable): Work items; consumed eagerly.
            threads (int, optional): Worker count; 1 runs inline. Defaults to 1.
            operation_name (str, optional): Name used in error messages and logs.

        Returns:
            list: ``[operation(item) for item in items]``.

        Raises:
            Exception: The first failure in item order, after logging it.
        """
        items = list(items)
        try:
            if threads is None or threads <= 1 or len(items) <= 1:
                return [operation(item) for item in items]
            with ThreadPoolExecutor(max_workers=threads) as pool:
                return list(pool.map(operation, items))
        except Exception as e:
            msg = f"Error during {operation_name}: {e}"
            logger.error(msg)
            raise

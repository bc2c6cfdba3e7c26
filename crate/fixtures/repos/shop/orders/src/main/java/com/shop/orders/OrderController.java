package com.shop.orders;

public class OrderController {
    private final OrderService service = new OrderService();

    public String checkout(String sku) {
        Order order = service.place(sku, 1);
        return "ordered " + order.getSku();
    }
}
